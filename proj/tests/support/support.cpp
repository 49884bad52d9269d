#include "support.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>

#ifndef CARDNET_FIXTURES_DIR
#define CARDNET_FIXTURES_DIR "fixtures"
#endif

namespace cardnet::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path fixtures_dir() { return CARDNET_FIXTURES_DIR; }

std::array<std::uint8_t, 3> class_tint(std::size_t label) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 6> tints{{
      {235, 225, 200},  // white: pale warm
      {40, 80, 200},    // blue
      {35, 30, 40},     // black
      {200, 40, 35},    // red
      {40, 160, 60},    // green
      {140, 140, 150},  // colorless: mid grey
  }};
  return tints.at(label);
}

Image tint_image(std::size_t label, Dims dims, std::mt19937_64& rng) {
  const auto tint = class_tint(label);
  Image img(dims.height, dims.width);
  std::normal_distribution<double> noise(0.0, 18.0);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < dims.height; ++y)
      for (int x = 0; x < dims.width; ++x)
        img.at(c, y, x) = std::uint8_t(std::clamp(double(tint[c]) + noise(rng), 0.0, 255.0));
  std::uniform_int_distribution<int> ys(0, dims.height - 1), xs(0, dims.width - 1), rs(1, 4);
  std::uniform_real_distribution<double> shade(0.55, 0.9);
  for (int blob = 0; blob < 3; ++blob) {
    const int cy = ys(rng), cx = xs(rng), r = rs(rng);
    const double s = shade(rng);
    for (int y = std::max(0, cy - r); y < std::min(dims.height, cy + r + 1); ++y)
      for (int x = std::max(0, cx - r); x < std::min(dims.width, cx + r + 1); ++x)
        for (int c = 0; c < 3; ++c) img.at(c, y, x) = std::uint8_t(img.at(c, y, x) * s);
  }
  return img;
}

std::vector<ImageSample> tint_dataset(std::size_t per_class, std::size_t classes, Dims dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ImageSample> out;
  for (std::size_t i = 0; i < per_class; ++i)
    for (std::size_t label = 0; label < classes; ++label)
      out.push_back({tint_image(label, dims, rng), std::uint16_t(label),
                     "tint-" + std::to_string(label) + "-" + std::to_string(i)});
  return out;
}

namespace {

template <class T, std::size_t N>
const T& pick(const std::array<T, N>& items, std::mt19937_64& rng) {
  return items[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

}  // namespace

std::string keyword_text(std::size_t label, std::mt19937_64& rng) {
  static const std::array<std::array<const char*, 4>, 5> markers{{
      {"flying", "vigilance", "lifelink", "exalted"},
      {"scry", "counter", "flash", "hexproof"},
      {"deathtouch", "sacrifice", "graveyard", "menace"},
      {"haste", "burn", "firebreathing", "prowess"},
      {"trample", "reach", "forage", "landfall"},
  }};
  static const std::array<const char*, 6> openers{
      "When {this card} enters the battlefield,", "At the beginning of your upkeep,", "{T}:",
      "Whenever a creature you control attacks,", "{2}, {T}:", "As long as you control another creature,"};
  static const std::array<const char*, 6> bodies{
      "target creature gets +1/+1 until end of turn.", "draw a card, then discard a card.",
      "you gain 2 life.", "put a +1/+1 counter on target creature.", "tap target permanent.",
      "each player loses 1 life."};
  std::string text = pick(openers, rng);
  text += " ";
  text += pick(bodies, rng);
  const std::string marker = pick(markers.at(label), rng);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: text = marker + ". " + text; break;
    case 1: text += " Creatures you control gain " + marker + " until end of turn."; break;
    default: text = "Kicker {1}. " + text + " " + marker + " applies."; break;
  }
  return text;
}

Card random_card(std::size_t index, std::mt19937_64& rng) {
  static const std::array<const char*, 10> words{"Ember",  "Tide", "Grave|yard", "Thorn", "Sky",
                                                 "Back\\slash", "Iron", "Mire", "Dawn", "Storm"};
  static const std::array<const char*, 9> symbols{"{1}", "{2}", "{X}", "{W}", "{U}", "{B}", "{R}", "{G}", "{W/U}"};
  static const std::array<const char*, 6> types{"Creature — Elf", "Instant", "Sorcery", "Artifact",
                                                "Enchantment — Aura", "Legendary Creature — Dragon"};
  static const std::array<const char*, 6> rules{
      "Flying", "When NAME enters the battlefield, draw a card.", "NAME deals 2 damage to any target.\nFlashback {R}",
      "Pay {3G}: untap NAME | it gains haste.", "", "Choose one \\ both:\n• Scry 1.\n• Gain 1 life."};
  std::uniform_int_distribution<int> nwords(1, 3), nsym(0, 4), coin(0, 1);
  std::string name;
  for (int i = nwords(rng); i > 0; --i) name += std::string(name.empty() ? "" : " ") + pick(words, rng);
  name += " " + std::to_string(index);
  std::string cost;
  for (int i = nsym(rng); i > 0; --i) cost += pick(symbols, rng);
  const std::string type = pick(types, rng);
  std::string text = pick(rules, rng);
  for (auto pos = text.find("NAME"); pos != std::string::npos; pos = text.find("NAME", pos + name.size()))
    text.replace(pos, 4, name);
  std::optional<std::string> power, toughness;
  if (type.find("Creature") != std::string::npos || coin(rng)) {
    power = std::to_string(nsym(rng));
    toughness = coin(rng) ? "*" : std::to_string(nsym(rng) + 1);
  }
  return make_card("rc-" + std::to_string(index), name, cost, type, text, std::nullopt, power, toughness, "RND",
                   "rc-" + std::to_string(index) + ".png");
}

std::vector<double> random_distribution(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0;
  for (auto& x : v) s += x = e(rng);
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace cardnet::testing

namespace cardnet::testing {

nn::Sequential<double> reduced_image_network(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const nn::Shape in{3, 4, 4};
  nn::Sequential<double> net(in);
  auto& conv1 = net.add<nn::Conv2d<double>>(in, 4, 5, "conv1");
  net.add<nn::Relu<double>>(conv1.output_shape());
  auto& pool1 = net.add<nn::MaxPool<double>>(conv1.output_shape(), 3, 2);
  net.add<nn::LocalResponseNorm<double>>(pool1.output_shape(), 2, 1.0, 0.1, 0.75);
  auto& conv2 = net.add<nn::Conv2d<double>>(pool1.output_shape(), 4, 5, "conv2");
  net.add<nn::Relu<double>>(conv2.output_shape());
  net.add<nn::LocalResponseNorm<double>>(conv2.output_shape(), 2, 1.0, 0.1, 0.75);
  auto& pool2 = net.add<nn::MaxPool<double>>(conv2.output_shape(), 3, 2);
  auto& fc = net.add<nn::Dense<double>>(pool2.output_shape().size(), 6, "fc");
  net.add<nn::Relu<double>>(fc.output_shape());
  net.add<nn::Dense<double>>(6, 2, "softmax", "softmax");
  for (auto* p : net.params()) {
    const bool bias = p->name.find("bias") != std::string::npos || p->shape.size() == 1;
    if (bias)
      nn::uniform_fill<double>(p->value, 0.1, rng);
    else
      nn::gaussian_fill<double>(p->value, 0.4, rng);
  }
  return net;
}

double gradcheck(nn::Sequential<double>& net, const std::vector<std::vector<double>>& inputs,
                 const std::vector<std::size_t>& labels, std::size_t probes, std::uint64_t seed) {
  auto params = net.params();
  const auto classes = net.output_shape().size();
  std::vector<double> dlogits(classes);
  for (auto* p : params) p->zero_grad();
  auto loss = [&](bool with_grad) {
    double total = 0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      auto logits = net.forward(inputs[s], true);
      std::vector<double> copy(logits.begin(), logits.end());
      total += nn::softmax_cross_entropy<double>(copy, labels[s], with_grad ? std::span<double>(dlogits)
                                                                             : std::span<double>());
      if (with_grad) net.backward(dlogits);
    }
    return total;
  };
  loss(true);

  std::mt19937_64 rng(seed);
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t probe = 0; probe < probes; ++probe) {
    auto* p = probe < params.size() ? params[probe]
                                    : params[std::uniform_int_distribution<std::size_t>(0, params.size() - 1)(rng)];
    const auto i = std::uniform_int_distribution<std::size_t>(0, p->size() - 1)(rng);
    const double saved = p->value[i];
    p->value[i] = saved + h;
    const double up = loss(false);
    p->value[i] = saved - h;
    const double down = loss(false);
    p->value[i] = saved;
    const double numeric = (up - down) / (2 * h), analytic = p->grad[i];
    const double scale = std::max(std::abs(numeric), std::abs(analytic));
    if (scale < 1e-9) continue;
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  }
  return worst;
}

}  // namespace cardnet::testing

namespace cardnet::testing {

std::vector<BankEntry> random_bank(std::size_t n, double tie_share, std::mt19937_64& rng) {
  std::vector<BankEntry> bank;
  bank.reserve(n);
  std::bernoulli_distribution tie(tie_share);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && tie(rng)) {
      const auto& src = bank[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)];
      bank.push_back({i, "tie of " + std::to_string(src.bank_index), src.decoded, src.color_pred, src.type_pred, false});
      continue;
    }
    CardFields fields{"Generated " + std::to_string(i), "{1}", "Instant", "", "Draw a card."};
    bank.push_back({i, encode_fields(fields), fields,
                    PredictionVector(LabelSet::Color, random_distribution(kColorLabelCount, rng)),
                    PredictionVector(LabelSet::Type, random_distribution(kTypeLabelCount, rng)), false});
  }
  return bank;
}

std::size_t brute_force_match(const MatchQuery& query, const std::vector<BankEntry>& bank) {
  std::size_t best = static_cast<std::size_t>(-1);
  double best_score = 0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    if (bank[i].malformed && !query.include_malformed) continue;
    double cd = 0, td = 0;
    for (std::size_t j = 0; j < kColorLabelCount; ++j) cd += std::abs(query.color[j] - bank[i].color_pred[j]);
    for (std::size_t j = 0; j < kTypeLabelCount; ++j) td += std::abs(query.type[j] - bank[i].type_pred[j]);
    const double score = query.w_color * cd + query.w_type * td;
    if (best == static_cast<std::size_t>(-1) || score < best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

}  // namespace cardnet::testing
