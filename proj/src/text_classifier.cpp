#include "cardnet/text_classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "cardnet/error.hpp"
#include "cardnet/kernels.hpp"

namespace cardnet {

using nlohmann::json;
using kernels::Trans;

void TextCNNConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("vocabulary must contain at least the two sentinel tokens");
  if (embedding_dim == 0 || filters_per_width == 0) throw ConfigError("layer widths must be positive");
  if (filter_widths.empty()) throw ConfigError("at least one filter width is required");
  for (auto w : filter_widths) {
    if (w == 0) throw ConfigError("filter widths must be positive");
    if (w > max_len) throw ConfigError("filter width " + std::to_string(w) + " exceeds max_len");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
}

json TextCNNConfig::to_json() const {
  return json{{"vocab_size", vocab_size},
              {"embedding_dim", embedding_dim},
              {"filter_widths", filter_widths},
              {"filters_per_width", filters_per_width},
              {"max_len", max_len},
              {"labels", label_set_name(labels)},
              {"label_count", label_count()},
              {"dropout", dropout},
              {"learning_rate", learning_rate},
              {"epochs", epochs},
              {"batch_size", batch_size},
              {"embedding_init", embedding_init},
              {"fc_init_std", fc_init_std},
              {"seed", seed}};
}

TextCNNConfig TextCNNConfig::from_json(const json& j) {
  try {
    TextCNNConfig c;
    c.vocab_size = j.at("vocab_size");
    c.embedding_dim = j.at("embedding_dim");
    c.filter_widths = j.at("filter_widths").get<std::vector<std::size_t>>();
    c.filters_per_width = j.at("filters_per_width");
    c.max_len = j.at("max_len");
    c.labels = parse_label_set(j.at("labels").get<std::string>());
    c.dropout = j.at("dropout");
    c.learning_rate = j.at("learning_rate");
    c.epochs = j.at("epochs");
    c.batch_size = j.at("batch_size");
    c.embedding_init = j.at("embedding_init");
    c.fc_init_std = j.at("fc_init_std");
    c.seed = j.at("seed");
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("text model config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
}

template <class T>
TextCnn<T>::TextCnn(const TextCNNConfig& config, std::mt19937_64& rng)
    : config_((config.validate(), config)),
      embedding_("embedding", {config.vocab_size, config.embedding_dim}),
      dropout_({config.feature_count(), 1, 1}, config.dropout, rng()),
      head_(config.feature_count(), config.label_count(), "softmax", "softmax") {
  const std::size_t dim = config.embedding_dim, filters = config.filters_per_width;
  nn::uniform_fill<T>(embedding_.value, config.embedding_init, rng);
  std::fill_n(embedding_.value.begin() + Vocabulary::kPad * dim, dim, T(0));
  for (auto w : config.filter_widths) {
    const std::string name = "conv" + std::to_string(w);
    Branch b{w, nn::Param<T>(name + ".weight", {filters, w * dim}), nn::Param<T>(name + ".bias", {filters}),
             std::vector<T>((config.max_len - w + 1) * filters), std::vector<std::size_t>(filters, kNone)};
    nn::gaussian_fill<T>(b.weight.value, std::sqrt(2.0 / double(w * dim)), rng);
    branches_.push_back(std::move(b));
  }
  nn::gaussian_fill<T>(head_.weight().value, config.fc_init_std, rng);
  embedded_.resize(config.max_len * dim);
  dembedded_.resize(config.max_len * dim);
  features_.resize(config.feature_count());
  dropped_.resize(config.feature_count());
  dfeatures_.resize(config.feature_count());
  ddropped_.resize(config.feature_count());
  logits_.resize(config.label_count());
}

template <class T>
std::span<const T> TextCnn<T>::forward(std::span<const std::int32_t> tokens, bool training) {
  const std::size_t dim = config_.embedding_dim, len = config_.max_len, filters = config_.filters_per_width;
  if (tokens.size() != len)
    throw InputError("token sequence has length " + std::to_string(tokens.size()) + ", expected " +
                     std::to_string(len));
  tokens_.assign(tokens.begin(), tokens.end());
  for (std::size_t t = 0; t < len; ++t) {
    const auto id = tokens[t];
    if (id < 0 || std::size_t(id) >= config_.vocab_size)
      throw InputError("token id " + std::to_string(id) + " outside the vocabulary");
    std::copy_n(embedding_.value.begin() + std::size_t(id) * dim, dim, embedded_.begin() + t * dim);
  }

  std::size_t offset = 0;
  for (auto& b : branches_) {
    const std::size_t positions = len - b.width + 1, span = b.width * dim;
    // Consecutive windows overlap, so the embedded matrix doubles as the im2col
    // matrix with a row stride of one embedding.
    kernels::gemm<T>(Trans::No, Trans::Yes, positions, filters, span, T(1), embedded_.data(), dim,
                     b.weight.value.data(), span, T(0), b.response.data(), filters);
    for (std::size_t f = 0; f < filters; ++f) {
      T best = T(0);
      std::size_t arg = kNone;
      for (std::size_t t = 0; t < positions; ++t) {
        const T v = b.response[t * filters + f] + b.bias.value[f];
        if (v > best) {
          best = v;
          arg = t;
        }
      }
      features_[offset + f] = best;
      b.argmax[f] = arg;
    }
    offset += filters;
  }
  dropout_.forward(features_, dropped_, training);
  head_.forward(dropped_, logits_, training);
  return logits_;
}

template <class T>
void TextCnn<T>::backward(std::span<const T> dlogits) {
  const std::size_t dim = config_.embedding_dim, filters = config_.filters_per_width;
  head_.backward(dropped_, logits_, dlogits, ddropped_);
  dropout_.backward(features_, dropped_, ddropped_, dfeatures_);
  std::fill(dembedded_.begin(), dembedded_.end(), T(0));

  std::size_t offset = 0;
  for (auto& b : branches_) {
    const std::size_t span = b.width * dim;
    for (std::size_t f = 0; f < filters; ++f) {
      const std::size_t t = b.argmax[f];
      const T g = dfeatures_[offset + f];
      if (t == kNone || g == T(0)) continue;
      b.bias.grad[f] += g;
      kernels::axpy<T>(g, std::span<const T>(embedded_).subspan(t * dim, span),
                       std::span<T>(b.weight.grad).subspan(f * span, span));
      kernels::axpy<T>(g, std::span<const T>(b.weight.value).subspan(f * span, span),
                       std::span<T>(dembedded_).subspan(t * dim, span));
    }
    offset += filters;
  }
  for (std::size_t t = 0; t < tokens_.size(); ++t) {
    const auto id = std::size_t(tokens_[t]);
    if (id == std::size_t(Vocabulary::kPad)) continue;
    kernels::axpy<T>(T(1), std::span<const T>(dembedded_).subspan(t * dim, dim),
                     std::span<T>(embedding_.grad).subspan(id * dim, dim));
  }
}

template <class T>
std::vector<nn::Param<T>*> TextCnn<T>::params() {
  std::vector<nn::Param<T>*> out{&embedding_};
  for (auto& b : branches_) {
    out.push_back(&b.weight);
    out.push_back(&b.bias);
  }
  for (auto* p : head_.params()) out.push_back(p);
  return out;
}

template class TextCnn<float>;
template class TextCnn<double>;

// ---------------------------------------------------------------------------

TextClassifier::TextClassifier(const TextCNNConfig& config, Vocabulary vocab)
    : config_(config), vocab_(std::move(vocab)), mutex_(std::make_unique<std::mutex>()) {
  if (config_.vocab_size != vocab_.size())
    throw ConfigError("config vocab_size " + std::to_string(config_.vocab_size) + " differs from vocabulary size " +
                      std::to_string(vocab_.size()));
  std::mt19937_64 rng(config.seed);
  net_ = std::make_unique<TextCnn<float>>(config_, rng);
}

TextClassifier::TextClassifier(TextClassifier&&) noexcept = default;
TextClassifier& TextClassifier::operator=(TextClassifier&&) noexcept = default;
TextClassifier::~TextClassifier() = default;

PredictionVector TextClassifier::predict_ids(std::span<const std::int32_t> tokens) const {
  std::lock_guard lock(*mutex_);
  auto logits = net_->forward(tokens, false);
  return PredictionVector::from_logits<float>(config_.labels, logits);
}

PredictionVector TextClassifier::predict_text(std::string_view text) const {
  return predict_ids(encode_text(text, vocab_, config_.max_len));
}

nn::Artifact TextClassifier::to_artifact() const {
  nn::Artifact a;
  a.kind = "text-cnn";
  a.config = config_.to_json();
  a.config["vocabulary"] = vocab_.tokens();
  auto params = net_->params();
  a.store<float>(params);
  return a;
}

TextClassifier TextClassifier::from_artifact(const nn::Artifact& artifact) {
  artifact.expect_kind("text-cnn");
  std::vector<std::string> tokens;
  try {
    tokens = artifact.config.at("vocabulary").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("text model vocabulary: ") + e.what());
  }
  if (tokens.size() < 2 || tokens[0] != Vocabulary::kPadToken || tokens[1] != Vocabulary::kUnkToken)
    throw FormatError("text model vocabulary lacks its sentinel tokens");
  TextClassifier model(TextCNNConfig::from_json(artifact.config),
                       Vocabulary(std::vector<std::string>(tokens.begin() + 2, tokens.end())));
  auto params = model.net_->params();
  artifact.restore<float>(params);
  return model;
}

void TextClassifier::save(const std::filesystem::path& path) const { to_artifact().save(path); }

TextClassifier TextClassifier::load(const std::filesystem::path& path) {
  return from_artifact(nn::Artifact::load(path));
}

// ---------------------------------------------------------------------------

namespace {

void check_samples(const TextCNNConfig& config, std::span<const TextSample> samples, const char* which) {
  for (const auto& s : samples) {
    if (s.token_ids.size() != config.max_len)
      throw ConfigError(std::string(which) + " sample '" + s.card_id + "' has " + std::to_string(s.token_ids.size()) +
                        " tokens, config max_len is " + std::to_string(config.max_len));
    for (auto id : s.token_ids)
      if (id < 0 || std::size_t(id) >= config.vocab_size)
        throw ConfigError(std::string(which) + " sample '" + s.card_id + "' uses token id " + std::to_string(id) +
                          " outside the vocabulary");
    if (s.label_id >= config.label_count())
      throw ConfigError(std::string(which) + " sample '" + s.card_id + "' has a label outside the '" +
                        std::string(label_set_name(config.labels)) + "' label set");
  }
}

std::vector<std::size_t> canonical_order(std::span<const TextSample> samples) {
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto &x = samples[a], &y = samples[b];
    if (x.card_id != y.card_id) return x.card_id < y.card_id;
    if (x.label_id != y.label_id) return x.label_id < y.label_id;
    return x.token_ids < y.token_ids;
  });
  return idx;
}

}  // namespace

double evaluate(const TextClassifier& model, std::span<const TextSample> eval) {
  if (eval.empty()) throw InputError("cannot evaluate on an empty set");
  std::vector<std::size_t> predicted;
  std::vector<std::string> ids;
  std::vector<std::uint16_t> labels;
  for (const auto& s : eval) {
    predicted.push_back(model.predict_ids(s.token_ids).argmax());
    ids.push_back(s.card_id);
    labels.push_back(s.label_id);
  }
  return per_card_accuracy(predicted, ids, labels);
}

TrainedTextModel train_text(const TextCNNConfig& config, const Vocabulary& vocab, std::span<const TextSample> train,
                            std::span<const TextSample> eval, const EpochCallback& on_epoch) {
  config.validate();
  if (config.vocab_size != vocab.size())
    throw ConfigError("config vocab_size " + std::to_string(config.vocab_size) + " differs from vocabulary size " +
                      std::to_string(vocab.size()));
  if (train.empty()) throw InputError("training set is empty");
  check_samples(config, train, "training");
  check_samples(config, eval, "evaluation");

  const auto start = std::chrono::steady_clock::now();
  TextClassifier model(config, vocab);
  auto& net = model.network();
  auto params = net.params();
  nn::Adam<float> adam(config.learning_rate);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainReport report;
  report.kind = "text-cnn";
  report.config = config.to_json();

  auto order = canonical_order(train);
  std::vector<float> dlogits(config.label_count());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      for (std::size_t i = b; i < end; ++i) {
        const auto& s = train[order[i]];
        auto logits = net.forward(s.token_ids, true);
        const float loss = nn::softmax_cross_entropy<float>(logits, s.label_id, dlogits);
        if (!std::isfinite(loss))
          throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch));
        loss_sum += loss;
        net.backward(dlogits);
      }
      adam.step(params, 1.0 / double(end - b));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(order.size());
    rec.learning_rate = adam.learning_rate();
    if (!std::isfinite(rec.train_loss))
      throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch));
    if (!eval.empty()) rec.eval_accuracy = evaluate(model, eval);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  report.final_accuracy = report.epochs.back().eval_accuracy;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

}  // namespace cardnet
