#include "cardnet/text_generator.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

#include "cardnet/card_encoding.hpp"
#include "cardnet/error.hpp"
#include "cardnet/kernels.hpp"

namespace cardnet {

using nlohmann::json;
using kernels::Trans;

void GeneratorConfig::validate() const {
  if (hidden_size == 0 || layers == 0) throw ConfigError("hidden size and layer count must be positive");
  if (sequence_length == 0 || batch_size == 0) throw ConfigError("sequence length and batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(grad_clip > 0.0)) throw ConfigError("gradient clip must be positive");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (max_record_chars == 0) throw ConfigError("max record length must be positive");
}

json GeneratorConfig::to_json() const {
  return json{{"hidden_size", hidden_size},         {"layers", layers},
              {"sequence_length", sequence_length}, {"batch_size", batch_size},
              {"learning_rate", learning_rate},     {"epochs", epochs},
              {"grad_clip", grad_clip},             {"init_range", init_range},
              {"temperature", temperature},         {"max_record_chars", max_record_chars},
              {"seed", seed}};
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
  try {
    GeneratorConfig c;
    c.hidden_size = j.at("hidden_size");
    c.layers = j.at("layers");
    c.sequence_length = j.at("sequence_length");
    c.batch_size = j.at("batch_size");
    c.learning_rate = j.at("learning_rate");
    c.epochs = j.at("epochs");
    c.grad_clip = j.at("grad_clip");
    c.init_range = j.at("init_range");
    c.temperature = j.at("temperature");
    c.max_record_chars = j.at("max_record_chars");
    c.seed = j.at("seed");
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("generator config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

template <class T>
CharLstm<T>::CharLstm(std::size_t vocab, std::size_t hidden, std::size_t layers, double init_range,
                      std::mt19937_64& rng)
    : vocab_(vocab), hidden_(hidden), layers_(layers), wy_("out.weight", {hidden, vocab}), by_("out.bias", {vocab}) {
  if (vocab < 2) throw ConfigError("generator alphabet needs at least two symbols");
  const std::size_t g = 4 * hidden;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string p = "lstm" + std::to_string(l);
    const std::size_t in = l == 0 ? vocab : hidden;
    LayerParams lp{nn::Param<T>(p + ".wx", {in, g}), nn::Param<T>(p + ".wh", {hidden, g}), nn::Param<T>(p + ".b", {g})};
    nn::uniform_fill<T>(lp.wx.value, init_range, rng);
    nn::uniform_fill<T>(lp.wh.value, init_range, rng);
    std::fill_n(lp.b.value.begin() + hidden, hidden, T(1));  // forget gate
    lp_.push_back(std::move(lp));
  }
  nn::uniform_fill<T>(wy_.value, init_range, rng);
}

template <class T>
typename CharLstm<T>::State CharLstm<T>::zero_state(std::size_t batch) const {
  State s;
  s.batch = batch;
  s.h.assign(layers_, std::vector<T>(batch * hidden_, T(0)));
  s.c.assign(layers_, std::vector<T>(batch * hidden_, T(0)));
  return s;
}

template <class T>
void CharLstm<T>::cell_forward(std::size_t l, const std::int32_t* chars, const T* x, const T* h_prev,
                               const T* c_prev, T* gates, T* c, T* tanh_c, T* h, std::size_t batch) {
  const std::size_t H = hidden_, G = 4 * H;
  auto& p = lp_[l];
  for (std::size_t b = 0; b < batch; ++b) {
    T* row = gates + b * G;
    if (l == 0) {
      const T* w = p.wx.value.data() + std::size_t(chars[b]) * G;
      for (std::size_t j = 0; j < G; ++j) row[j] = p.b.value[j] + w[j];
    } else {
      std::copy(p.b.value.begin(), p.b.value.end(), row);
    }
  }
  if (l > 0) kernels::gemm<T>(Trans::No, Trans::No, batch, G, H, T(1), x, H, p.wx.value.data(), G, T(1), gates, G);
  kernels::gemm<T>(Trans::No, Trans::No, batch, G, H, T(1), h_prev, H, p.wh.value.data(), G, T(1), gates, G);
  for (std::size_t b = 0; b < batch; ++b) {
    T* gi = gates + b * G;
    T *gf = gi + H, *gg = gi + 2 * H, *go = gi + 3 * H;
    for (std::size_t j = 0; j < H; ++j) {
      gi[j] = sigmoid(gi[j]);
      gf[j] = sigmoid(gf[j]);
      gg[j] = std::tanh(gg[j]);
      go[j] = sigmoid(go[j]);
      const std::size_t k = b * H + j;
      c[k] = gf[j] * c_prev[k] + gi[j] * gg[j];
      tanh_c[k] = std::tanh(c[k]);
      h[k] = go[j] * tanh_c[k];
    }
  }
}

template <class T>
double CharLstm<T>::train_chunk(std::span<const std::int32_t> inputs, std::span<const std::int32_t> targets,
                                State& state, double grad_scale) {
  const std::size_t B = state.batch, H = hidden_, G = 4 * H, V = vocab_;
  if (B == 0 || inputs.size() % B != 0 || targets.size() != inputs.size())
    throw InputError("chunk size does not match the state batch");
  const std::size_t S = inputs.size() / B, L = layers_;
  for (auto id : inputs)
    if (id < 0 || std::size_t(id) >= V) throw InputError("symbol id outside the alphabet");
  for (auto id : targets)
    if (id < 0 || std::size_t(id) >= V) throw InputError("symbol id outside the alphabet");

  // Per layer: gates S×B×G, c and h (S+1)×B×H with slot 0 the incoming state.
  std::vector<std::vector<T>> gates(L, std::vector<T>(S * B * G)), cs(L, std::vector<T>((S + 1) * B * H)),
      hs(L, std::vector<T>((S + 1) * B * H)), tcs(L, std::vector<T>(S * B * H));
  for (std::size_t l = 0; l < L; ++l) {
    std::copy(state.h[l].begin(), state.h[l].end(), hs[l].begin());
    std::copy(state.c[l].begin(), state.c[l].end(), cs[l].begin());
  }
  for (std::size_t t = 0; t < S; ++t)
    for (std::size_t l = 0; l < L; ++l) {
      const T* x = l == 0 ? nullptr : hs[l - 1].data() + (t + 1) * B * H;
      cell_forward(l, inputs.data() + t * B, x, hs[l].data() + t * B * H, cs[l].data() + t * B * H,
                   gates[l].data() + t * B * G, cs[l].data() + (t + 1) * B * H, tcs[l].data() + t * B * H,
                   hs[l].data() + (t + 1) * B * H, B);
    }

  const std::size_t rows = S * B;
  const T* htop = hs[L - 1].data() + B * H;
  std::vector<T> dlogits(rows * V);
  kernels::gemm<T>(Trans::No, Trans::No, rows, V, H, T(1), htop, H, wy_.value.data(), V, T(0), dlogits.data(), V);
  double loss = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    T* row = dlogits.data() + r * V;
    for (std::size_t v = 0; v < V; ++v) row[v] += by_.value[v];
    std::span<const T> logits(row, V);
    std::vector<T> d(V);
    loss += double(nn::softmax_cross_entropy<T>(logits, std::size_t(targets[r]), d));
    for (std::size_t v = 0; v < V; ++v) row[v] = d[v] * T(grad_scale);
  }
  if (!std::isfinite(loss)) return loss;

  kernels::gemm<T>(Trans::Yes, Trans::No, H, V, rows, T(1), htop, H, dlogits.data(), V, T(1), wy_.grad.data(), V);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t v = 0; v < V; ++v) by_.grad[v] += dlogits[r * V + v];
  std::vector<T> dh_above(rows * H);
  kernels::gemm<T>(Trans::No, Trans::Yes, rows, H, V, T(1), dlogits.data(), V, wy_.value.data(), V, T(0),
                   dh_above.data(), H);

  std::vector<T> dh_next(B * H), dc_next(B * H), dg(B * G), dx(rows * H);
  for (std::size_t l = L; l-- > 0;) {
    auto& p = lp_[l];
    std::fill(dh_next.begin(), dh_next.end(), T(0));
    std::fill(dc_next.begin(), dc_next.end(), T(0));
    if (l > 0) std::fill(dx.begin(), dx.end(), T(0));
    for (std::size_t t = S; t-- > 0;) {
      const T* gt = gates[l].data() + t * B * G;
      const T* c_prev = cs[l].data() + t * B * H;
      const T* tc = tcs[l].data() + t * B * H;
      for (std::size_t b = 0; b < B; ++b) {
        const T* gi = gt + b * G;
        const T *gf = gi + H, *gg = gi + 2 * H, *go = gi + 3 * H;
        T* d = dg.data() + b * G;
        for (std::size_t j = 0; j < H; ++j) {
          const std::size_t k = b * H + j;
          const T dh = dh_above[(t * B + b) * H + j] + dh_next[k];
          const T dc = dh * go[j] * (T(1) - tc[k] * tc[k]) + dc_next[k];
          d[j] = dc * gg[j] * gi[j] * (T(1) - gi[j]);
          d[H + j] = dc * c_prev[k] * gf[j] * (T(1) - gf[j]);
          d[2 * H + j] = dc * gi[j] * (T(1) - gg[j] * gg[j]);
          d[3 * H + j] = dh * tc[k] * go[j] * (T(1) - go[j]);
          dc_next[k] = dc * gf[j];
        }
      }
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < G; ++j) p.b.grad[j] += dg[b * G + j];
      kernels::gemm<T>(Trans::Yes, Trans::No, H, G, B, T(1), hs[l].data() + t * B * H, H, dg.data(), G, T(1),
                       p.wh.grad.data(), G);
      kernels::gemm<T>(Trans::No, Trans::Yes, B, H, G, T(1), dg.data(), G, p.wh.value.data(), G, T(0),
                       dh_next.data(), H);
      if (l == 0) {
        for (std::size_t b = 0; b < B; ++b)
          kernels::axpy<T>(T(1), std::span<const T>(dg).subspan(b * G, G),
                           std::span<T>(p.wx.grad).subspan(std::size_t(inputs[t * B + b]) * G, G));
      } else {
        kernels::gemm<T>(Trans::Yes, Trans::No, H, G, B, T(1), hs[l - 1].data() + (t + 1) * B * H, H, dg.data(), G,
                         T(1), p.wx.grad.data(), G);
        kernels::gemm<T>(Trans::No, Trans::Yes, B, H, G, T(1), dg.data(), G, p.wx.value.data(), G, T(0),
                         dx.data() + t * B * H, H);
      }
    }
    if (l > 0) std::swap(dh_above, dx);
  }

  for (std::size_t l = 0; l < L; ++l) {
    std::copy_n(hs[l].begin() + S * B * H, B * H, state.h[l].begin());
    std::copy_n(cs[l].begin() + S * B * H, B * H, state.c[l].begin());
  }
  return loss;
}

template <class T>
std::span<const T> CharLstm<T>::step(std::span<const std::int32_t> inputs, State& state) {
  const std::size_t B = state.batch, H = hidden_, V = vocab_;
  if (inputs.size() != B) throw InputError("step input does not match the state batch");
  for (auto id : inputs)
    if (id < 0 || std::size_t(id) >= V) throw InputError("symbol id outside the alphabet");
  scratch_.resize(B * 4 * H + B * H);
  T* tanh_c = scratch_.data() + B * 4 * H;
  for (std::size_t l = 0; l < layers_; ++l) {
    const T* x = l == 0 ? nullptr : state.h[l - 1].data();
    cell_forward(l, inputs.data(), x, state.h[l].data(), state.c[l].data(), scratch_.data(), state.c[l].data(),
                 tanh_c, state.h[l].data(), B);
  }
  logits_.resize(B * V);
  kernels::gemm<T>(Trans::No, Trans::No, B, V, H, T(1), state.h[layers_ - 1].data(), H, wy_.value.data(), V, T(0),
                   logits_.data(), V);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t v = 0; v < V; ++v) logits_[b * V + v] += by_.value[v];
  return logits_;
}

template <class T>
std::vector<nn::Param<T>*> CharLstm<T>::params() {
  std::vector<nn::Param<T>*> out;
  for (auto& p : lp_) {
    out.push_back(&p.wx);
    out.push_back(&p.wh);
    out.push_back(&p.b);
  }
  out.push_back(&wy_);
  out.push_back(&by_);
  return out;
}

template class CharLstm<float>;
template class CharLstm<double>;

// ---------------------------------------------------------------------------

namespace {

std::string make_alphabet(std::string_view text) {
  std::array<bool, 256> seen{};
  for (unsigned char c : text) seen[c] = true;
  seen[static_cast<unsigned char>(kRecordTerminator)] = true;
  std::string out;
  for (int c = 0; c < 256; ++c)
    if (seen[std::size_t(c)]) out += static_cast<char>(c);
  return out;
}

}  // namespace

TextGenerator::TextGenerator(const GeneratorConfig& config, std::string alphabet)
    : config_(config), alphabet_(std::move(alphabet)), mutex_(std::make_unique<std::mutex>()) {
  config_.validate();
  if (alphabet_.find(kRecordTerminator) == std::string::npos)
    throw ConfigError("generator alphabet must contain the record terminator");
  if (!std::is_sorted(alphabet_.begin(), alphabet_.end(),
                      [](char a, char b) { return static_cast<unsigned char>(a) < static_cast<unsigned char>(b); }) ||
      std::adjacent_find(alphabet_.begin(), alphabet_.end()) != alphabet_.end())
    throw ConfigError("generator alphabet must be sorted and free of duplicates");
  std::mt19937_64 rng(config_.seed);
  net_ = std::make_unique<CharLstm<float>>(alphabet_.size(), config_.hidden_size, config_.layers,
                                           config_.init_range, rng);
}

TextGenerator::TextGenerator(TextGenerator&&) noexcept = default;
TextGenerator& TextGenerator::operator=(TextGenerator&&) noexcept = default;
TextGenerator::~TextGenerator() = default;

std::vector<std::int32_t> TextGenerator::encode(std::string_view text) const {
  std::array<std::int32_t, 256> index;
  index.fill(-1);
  for (std::size_t i = 0; i < alphabet_.size(); ++i) index[static_cast<unsigned char>(alphabet_[i])] = std::int32_t(i);
  std::vector<std::int32_t> out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (index[c] < 0) throw InputError("character " + std::to_string(int(c)) + " is not in the generator alphabet");
    out.push_back(index[c]);
  }
  return out;
}

std::vector<std::string> TextGenerator::sample(std::size_t count, double temperature, std::uint64_t seed) const {
  if (count == 0) throw InputError("sample count must be at least 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
  std::lock_guard lock(*mutex_);
  const std::int32_t term = encode(std::string_view(&kRecordTerminator, 1))[0];
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto state = net_->zero_state(1);
  std::vector<double> probs(alphabet_.size());

  std::vector<std::string> out;
  std::string current;
  std::int32_t input = term;
  while (out.size() < count) {
    auto logits = net_->step(std::span<const std::int32_t>(&input, 1), state);
    double mx = -INFINITY;
    for (float v : logits) mx = std::max(mx, double(v));
    double z = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) z += probs[i] = std::exp((double(logits[i]) - mx) / temperature);
    const double u = uniform(rng) * z;
    std::size_t pick = 0;
    for (double acc = probs[0]; pick + 1 < probs.size() && acc <= u; acc += probs[++pick]) {
    }
    input = std::int32_t(pick);
    if (input == term) {
      out.push_back(std::move(current));
      current.clear();
    } else if (current.size() + 1 >= config_.max_record_chars) {
      current += alphabet_[pick];
      out.push_back(std::move(current));
      current.clear();
      input = term;
    } else {
      current += alphabet_[pick];
    }
  }
  return out;
}

nn::Artifact TextGenerator::to_artifact() const {
  nn::Artifact a;
  a.kind = "char-rnn";
  a.config = config_.to_json();
  std::vector<int> bytes;
  for (unsigned char c : alphabet_) bytes.push_back(c);
  a.config["alphabet"] = bytes;
  auto params = net_->params();
  a.store<float>(params);
  return a;
}

TextGenerator TextGenerator::from_artifact(const nn::Artifact& artifact) {
  artifact.expect_kind("char-rnn");
  std::string alphabet;
  try {
    for (int b : artifact.config.at("alphabet").get<std::vector<int>>()) {
      if (b < 0 || b > 255) throw FormatError("generator alphabet holds a value outside 0..255");
      alphabet += static_cast<char>(b);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("generator alphabet: ") + e.what());
  }
  TextGenerator model(GeneratorConfig::from_json(artifact.config), alphabet);
  auto params = model.net_->params();
  artifact.restore<float>(params);
  return model;
}

void TextGenerator::save(const std::filesystem::path& path) const { to_artifact().save(path); }

TextGenerator TextGenerator::load(const std::filesystem::path& path) { return from_artifact(nn::Artifact::load(path)); }

TrainedGenerator train_generator(const GeneratorConfig& config, std::string_view stream,
                                 const EpochCallback& on_epoch) {
  config.validate();
  if (stream.empty()) throw InputError("training stream is empty");
  const auto start = std::chrono::steady_clock::now();

  std::string text;
  if (stream.front() != kRecordTerminator) text += kRecordTerminator;
  text += stream;
  TextGenerator model(config, make_alphabet(text));
  const auto ids = model.encode(text);
  const std::size_t pairs = ids.size() - 1;
  if (pairs == 0) throw InputError("training stream is too short");

  // Cut the text into B equal streams, each at least one sequence long when possible.
  const std::size_t batch = std::clamp<std::size_t>(pairs / config.sequence_length, 1, config.batch_size);
  const std::size_t segment = pairs / batch;

  auto& net = model.network();
  auto params = net.params();
  nn::Adam<float> adam(config.learning_rate);

  TrainReport report;
  report.kind = "char-rnn";
  report.config = config.to_json();
  report.config["streams"] = batch;

  std::vector<std::int32_t> inputs, targets;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto state = net.zero_state(batch);
    double loss_sum = 0;
    std::size_t chars = 0;
    for (std::size_t t0 = 0; t0 < segment; t0 += config.sequence_length) {
      const std::size_t len = std::min(config.sequence_length, segment - t0);
      inputs.resize(len * batch);
      targets.resize(len * batch);
      for (std::size_t t = 0; t < len; ++t)
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t pos = b * segment + t0 + t;
          inputs[t * batch + b] = ids[pos];
          targets[t * batch + b] = ids[pos + 1];
        }
      const double loss = net.train_chunk(inputs, targets, state, 1.0 / double(len * batch));
      if (!std::isfinite(loss))
        throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch));
      loss_sum += loss;
      chars += len * batch;
      nn::clip_grad_norm<float>(params, config.grad_clip);
      adam.step(params, 1.0);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(chars);
    rec.learning_rate = adam.learning_rate();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

}  // namespace cardnet
