// Acceptance runner: one PASS/FAIL/SKIP line per criterion, exit status 1 on
// any FAIL. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cardnet/card.hpp"
#include "cardnet/card_bank.hpp"
#include "cardnet/card_encoding.hpp"
#include "cardnet/dataset.hpp"
#include "cardnet/image.hpp"
#include "cardnet/image_classifier.hpp"
#include "cardnet/matcher.hpp"
#include "cardnet/text.hpp"
#include "cardnet/text_classifier.hpp"
#include "cardnet/text_generator.hpp"
#include "io.hpp"
#include "support.hpp"

using namespace cardnet;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- 1 ----------------------------------------------------------------------

Outcome batch_roundtrip() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> byte(0, 255), label(0, 5);
  std::vector<ImageSample> samples;
  for (std::size_t i = 0; i < 1000; ++i) {
    ImageSample s{Image(32, 32), std::uint16_t(label(rng)), "card-" + std::to_string(i)};
    for (auto& p : s.image.pixels) p = std::uint8_t(byte(rng));
    samples.push_back(std::move(s));
  }
  testing::TempDir tmp("acc1");
  BatchManifest manifest;
  manifest.label_set = "color";
  const auto set = write_batches(samples, manifest, tmp.path(), 300);
  if (set.files.size() != 4) return fail("expected 4 batch files, got " + std::to_string(set.files.size()));
  if (read_batches(tmp.path()) != samples) return fail("read-back samples differ");
  const auto bytes = encode_batch(samples, {32, 32});
  auto decoded = decode_batch(bytes, "memory");
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (decoded[i].image != samples[i].image || decoded[i].label_id != samples[i].label_id)
      return fail("in-memory roundtrip differs at record " + std::to_string(i));

  // "MTGBATCH", N=1, H=1, W=2, label 0x0203, R plane {10,20}, G {30,40}, B {50,60}.
  const std::vector<std::uint8_t> hand{'M', 'T', 'G', 'B', 'A', 'T', 'C', 'H', 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0,
                                       0x03, 0x02, 10, 20, 30, 40, 50, 60};
  const auto one = decode_batch(hand, "hand");
  if (one.size() != 1 || one[0].label_id != 0x0203) return fail("hand record header misread");
  const auto& px = one[0].image;
  if (px.at(0, 0, 0) != 10 || px.at(0, 0, 1) != 20 || px.at(1, 0, 0) != 30 || px.at(1, 0, 1) != 40 ||
      px.at(2, 0, 0) != 50 || px.at(2, 0, 1) != 60)
    return fail("hand record pixels misread");
  if (encode_batch(one, {1, 2}) != hand) return fail("hand record does not re-encode to the same bytes");
  return pass("1000 samples in 4 files bit-exact; hand record ok");
}

// --- 2 ----------------------------------------------------------------------

Outcome multilabel_expansion() {
  const auto corpus = load_corpus(testing::fixtures_dir() / "corpus.csv", CorpusFormat::Csv);
  std::multiset<std::pair<std::string, std::string>> got;
  for (const auto& e : expand_multilabel(corpus, LabelSet::Color))
    got.emplace(e.card_id, std::string(label_names(LabelSet::Color)[e.label_id]));
  const std::multiset<std::pair<std::string, std::string>> expected{
      {"fx-001", "White"},     {"fx-002", "Blue"},      {"fx-003", "Black"},     {"fx-004", "Red"},
      {"fx-005", "Green"},     {"fx-006", "White"},     {"fx-006", "Blue"},      {"fx-007", "Blue"},
      {"fx-007", "Black"},     {"fx-008", "Green"},     {"fx-009", "White"},     {"fx-009", "Blue"},
      {"fx-009", "Green"},     {"fx-010", "White"},     {"fx-010", "Blue"},      {"fx-010", "Black"},
      {"fx-010", "Red"},       {"fx-010", "Green"},     {"fx-011", "Colorless"}, {"fx-012", "Colorless"},
      {"fx-013", "Colorless"}, {"fx-014", "Red"},       {"fx-015", "White"},     {"fx-015", "Black"},
      {"fx-016", "Red"},       {"fx-017", "Red"},       {"fx-017", "Green"},     {"fx-018", "White"},
      {"fx-018", "Red"},       {"fx-019", "Blue"},      {"fx-020", "Black"},     {"fx-020", "Red"},
      {"fx-020", "Green"}};
  if (got != expected) return fail("expanded pairs differ from the hand-enumerated set");
  std::multiset<std::string> wug;
  for (const auto& [id, label] : got)
    if (id == "fx-009") wug.insert(label);
  if (wug != std::multiset<std::string>{"Blue", "Green", "White"}) return fail("WUG card does not yield {W, U, G}");
  return pass("33 pairs match; WUG card -> {W, U, G}");
}

// --- 3 ----------------------------------------------------------------------

Outcome era_statistics() {
  const char* path = std::getenv("CARDNET_ERA_CORPUS");
  if (!path || !*path) return {Status::Skip, "CARDNET_ERA_CORPUS not set"};
  const auto corpus = load_corpus(path, corpus_format_for(path));
  const auto stats = corpus_stats(corpus);
  const std::vector<std::pair<std::string, std::size_t>> colors{
      {"G", 5068},    {"B", 5021},   {"R", 4973},   {"W", 4878},   {"U", 4828},   {"Cl", 3425},  {"WG", 378},
      {"BR", 376},    {"RG", 372},   {"UB", 354},   {"WU", 346},   {"BG", 288},   {"WB", 266},   {"UR", 260},
      {"WR", 249},    {"UG", 238},   {"UBR", 99},   {"WRG", 86},   {"WUG", 79},   {"BRG", 79},   {"WUB", 75},
      {"WUBRG", 66},  {"WBR", 49},   {"WBG", 41},   {"UBG", 38},   {"WUR", 37},   {"URG", 37},   {"UBRG", 2},
      {"WUBR", 2},    {"WUBG", 2},   {"WBRG", 2},   {"WURG", 2}};
  const std::vector<std::pair<std::string, std::size_t>> types{
      {"Creature", 14081},         {"Instant", 3962},        {"Sorcery", 3638},       {"Enchantment", 3519},
      {"Land", 3297},              {"Artifact", 2259},       {"Creature/Artifact", 920}, {"Planeswalker", 179},
      {"Creature/Enchantment", 98}, {"Land/Artifact", 14},    {"Instant/Sorcery", 13}, {"Artifact/Enchantment", 8},
      {"Creature/Land", 2}};
  std::string mismatches;
  for (const auto& [code, n] : colors)
    if (stats.color_count(code) != n)
      mismatches += " " + code + "=" + std::to_string(stats.color_count(code)) + "(want " + std::to_string(n) + ")";
  for (const auto& [combo, n] : types)
    if (stats.type_count(combo) != n)
      mismatches += " " + combo + "=" + std::to_string(stats.type_count(combo)) + "(want " + std::to_string(n) + ")";
  if (fmt(stats.multicolored_percent, 2) != "11.94")
    mismatches += " multicolored=" + fmt(stats.multicolored_percent, 2) + "%(want 11.94%)";
  if (!mismatches.empty()) return fail("mismatches:" + mismatches);
  return pass(std::to_string(stats.total) + " cards; both tables and 11.94% match");
}

// --- 4 ----------------------------------------------------------------------

bool valid_vector(const PredictionVector& v) {
  double sum = 0;
  for (double s : v.scores()) {
    if (!(s >= 0.0)) return false;
    sum += s;
  }
  return std::abs(sum - 1.0) <= 1e-6;
}

Outcome classifier_contract() {
  testing::TempDir tmp("acc4");
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> byte(0, 255);

  CNNConfig ic;
  ic.conv1_maps = 16;
  ic.conv2_maps = 16;
  ic.fc_width = 32;
  ic.epochs = 2;
  ic.batch_size = 16;
  ic.seed = 4;
  const auto image_model = train_image(ic, testing::tint_dataset(20, 6, ic.input, 4), {}).model;
  image_model.save(tmp / "image.model");
  const auto image_loaded = ImageClassifier::load(tmp / "image.model");
  for (int i = 0; i < 100; ++i) {
    Image img(32, 32);
    for (auto& p : img.pixels) p = std::uint8_t(byte(rng));
    const auto v = image_model.predict(img);
    if (!valid_vector(v)) return fail("image prediction " + std::to_string(i) + " is not a distribution");
    if (!(image_loaded.predict(img) == v) || image_loaded.logits(img) != image_model.logits(img))
      return fail("image model outputs changed after save/load");
  }

  std::vector<std::string> texts;
  std::vector<std::uint16_t> labels;
  for (int i = 0; i < 60; ++i) {
    texts.push_back(testing::keyword_text(i % 5, rng));
    labels.push_back(std::uint16_t(i % 5));
  }
  const auto vocab = build_text_vocab(texts, 1);
  TextCNNConfig tc;
  tc.vocab_size = vocab.size();
  tc.embedding_dim = 16;
  tc.filters_per_width = 8;
  tc.max_len = 32;
  tc.labels = LabelSet::Type;
  tc.epochs = 2;
  tc.seed = 4;
  std::vector<TextSample> train;
  for (std::size_t i = 0; i < texts.size(); ++i)
    train.push_back({encode_text(texts[i], vocab, tc.max_len), labels[i], "t" + std::to_string(i)});
  const auto text_model = train_text(tc, vocab, train, {}).model;
  text_model.save(tmp / "text.model");
  const auto text_loaded = TextClassifier::load(tmp / "text.model");
  const auto& words = vocab.tokens();
  std::uniform_int_distribution<std::size_t> word(0, words.size() - 1), length(0, 60);
  for (int i = 0; i < 100; ++i) {
    std::string text;
    for (std::size_t n = length(rng); n > 0; --n) text += words[word(rng)] + " ";
    const auto v = text_model.predict_text(text);
    if (!valid_vector(v)) return fail("text prediction " + std::to_string(i) + " is not a distribution");
    if (!(text_loaded.predict_text(text) == v)) return fail("text model outputs changed after save/load");
  }
  return pass("2 models x 100 random inputs valid; save/load bitwise identical");
}

// --- 5 ----------------------------------------------------------------------

Outcome gradient_check() {
  auto net = testing::reduced_image_network(1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<std::vector<double>> inputs(3, std::vector<double>(3 * 4 * 4));
  for (auto& v : inputs)
    for (auto& x : v) x = d(rng);
  const double worst = testing::gradcheck(net, inputs, {0, 1, 1}, 100, 3);
  const std::string detail = "worst relative error " + std::to_string(worst) + " over 100 probes";
  return worst <= 1e-3 ? pass(detail) : fail(detail);
}

// --- 6 ----------------------------------------------------------------------

Outcome image_learning() {
  // 200 images per class; the card-coherent split keeps 1000 for training.
  auto data = testing::tint_dataset(200, 6, {32, 32}, 6);
  auto [train, eval] = split(std::move(data), SplitSpec{5.0 / 6.0, 6});
  CNNConfig config;  // default color architecture
  config.epochs = 8;
  config.batch_size = 32;
  config.seed = 6;
  const auto trained = train_image(config, train, eval);
  const double acc = *trained.report.final_accuracy;
  const std::string detail = std::to_string(train.size()) + " train / " + std::to_string(eval.size()) +
                             " eval, eval accuracy " + fmt(acc);
  return acc >= 0.9 ? pass(detail) : fail(detail);
}

// --- 7 ----------------------------------------------------------------------

Outcome text_learning() {
  std::mt19937_64 rng(7);
  std::vector<std::string> texts;
  std::vector<std::string> ids;
  std::vector<std::uint16_t> labels;
  for (std::size_t i = 0; i < 1200; ++i) {
    labels.push_back(std::uint16_t(i % 5));
    texts.push_back(testing::keyword_text(i % 5, rng));
    ids.push_back("kw-" + std::to_string(i));
  }
  const auto mask = split_mask(ids, SplitSpec{5.0 / 6.0, 7});
  std::vector<std::string> train_texts;
  for (std::size_t i = 0; i < texts.size(); ++i)
    if (mask[i]) train_texts.push_back(texts[i]);
  const auto vocab = build_text_vocab(train_texts, 1);
  TextCNNConfig config;  // default architecture
  config.vocab_size = vocab.size();
  config.max_len = 64;
  config.labels = LabelSet::Type;
  config.epochs = 4;
  config.seed = 7;
  std::vector<TextSample> train, eval;
  for (std::size_t i = 0; i < texts.size(); ++i)
    (mask[i] ? train : eval).push_back({encode_text(texts[i], vocab, config.max_len), labels[i], ids[i]});
  const auto trained = train_text(config, vocab, train, eval);
  const double acc = *trained.report.final_accuracy;
  const std::string detail = std::to_string(train.size()) + " train / " + std::to_string(eval.size()) +
                             " eval, eval accuracy " + fmt(acc);
  return acc >= 0.9 ? pass(detail) : fail(detail);
}

// --- 8 ----------------------------------------------------------------------

Outcome generator_memorization() {
  const std::vector<std::string> records{
      "Owl|{1}{W}|Creature — Bird|1/1|Flying",
      "Bolt|{R}|Instant||Deal 3 damage to any target.",
      "Grove|{G}|Land||{T}: Add {G}.",
      "Golem|{3}|Artifact Creature — Golem|3/3|",
      "Scry|{U}|Sorcery||Scry 2. Draw a card.",
  };
  std::string corpus;
  for (const auto& r : records) corpus += r + "\n";
  // Pad the last record's text to exactly 200 bytes.
  while (corpus.size() < 200) corpus.insert(corpus.size() - 1, "!");
  if (corpus.size() != 200) return fail("corpus is " + std::to_string(corpus.size()) + " bytes");
  std::set<std::string> expected;
  for (std::size_t start = 0, end; (end = corpus.find('\n', start)) != std::string::npos; start = end + 1)
    expected.insert(corpus.substr(start, end - start));

  GeneratorConfig config;
  config.hidden_size = 128;
  config.layers = 2;
  config.sequence_length = 50;
  config.batch_size = 1;
  config.learning_rate = 3e-3;
  config.epochs = 300;
  config.seed = 8;
  const auto trained = train_generator(config, corpus);
  const double loss = trained.report.epochs.back().train_loss;
  const auto samples = trained.model.sample(5, 0.01, 8);
  std::size_t verbatim = 0;
  for (const auto& s : samples) verbatim += expected.count(s);
  const std::string detail = "final loss " + fmt(loss) + " nats/char, " + std::to_string(verbatim) +
                             "/5 low-temperature samples are corpus records";
  return loss < 0.1 && verbatim > 0 ? pass(detail) : fail(detail);
}

// --- 9 ----------------------------------------------------------------------

Outcome encode_decode_identity() {
  std::mt19937_64 rng(9);
  for (std::size_t i = 0; i < 500; ++i) {
    const auto card = testing::random_card(i, rng);
    const auto decoded = decode_card(encode_card(card));
    if (decoded.malformed()) return fail("card " + std::to_string(i) + " decoded as malformed: " + decoded.reason);
    if (!(*decoded.fields == card_fields(card))) return fail("card " + std::to_string(i) + " fields differ");
  }
  return pass("500 cards recovered");
}

// --- 10 ---------------------------------------------------------------------

Outcome distance_correctness() {
  const PredictionVector image(LabelSet::Color, {0.2749, 0.0973, 0.2714, 0.0849, 0.2715, 0.0});
  const PredictionVector text(LabelSet::Color, {0.1779, 0.2637, 0.1634, 0.1216, 0.2734, 0.0});
  const double d = label_distance(image, text);
  if (std::abs(d - 0.4100) > 1e-4) return fail("table distance " + fmt(d, 6));
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10000; ++i) {
    const auto set = i % 2 ? LabelSet::Type : LabelSet::Color;
    const std::size_t n = label_count(set);
    const PredictionVector a(set, testing::random_distribution(n, rng));
    const PredictionVector b(set, testing::random_distribution(n, rng));
    const PredictionVector c(set, testing::random_distribution(n, rng));
    long double hand = 0;
    for (std::size_t j = 0; j < n; ++j) hand += std::abs((long double)a[j] - b[j]);
    const double ab = label_distance(a, b);
    if (std::abs(ab - double(hand)) > 1e-12) return fail("distance disagrees with the hand sum");
    if (ab != label_distance(b, a)) return fail("asymmetric");
    if (label_distance(a, a) != 0.0) return fail("d(a, a) != 0");
    if (label_distance(a, c) > ab + label_distance(b, c) + 1e-12) return fail("triangle inequality violated");
  }
  return pass("table distance " + fmt(d, 4) + "; 10000 metric triples ok");
}

// --- 11 ---------------------------------------------------------------------

Outcome matcher_equivalence() {
  std::mt19937_64 rng(11);
  std::size_t tie_cases = 0;
  for (int instance = 0; instance < 50; ++instance) {
    auto bank = testing::random_bank(1000, 0.2, rng);
    std::bernoulli_distribution broken(0.05);
    for (auto& e : bank)
      if (broken(rng)) {
        e.malformed = true;
        e.decoded.reset();
      }
    MatchQuery q{PredictionVector(LabelSet::Color, testing::random_distribution(kColorLabelCount, rng)),
                 PredictionVector(LabelSet::Type, testing::random_distribution(kTypeLabelCount, rng))};
    q.w_color = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    q.w_type = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    q.include_malformed = instance % 5 == 4;
    if (instance % 2 == 0) {
      // Aim at an entry that was copied from an earlier one: two or more exact ties.
      for (std::size_t i = bank.size(); i-- > 0;)
        if (bank[i].raw.rfind("tie of ", 0) == 0) {
          q.color = bank[i].color_pred;
          q.type = bank[i].type_pred;
          break;
        }
    }
    const auto expected = testing::brute_force_match(q, bank);
    std::size_t at_best = 0;
    const auto got = match(q, bank);
    for (const auto& e : bank)
      if ((!e.malformed || q.include_malformed) && e.color_pred == bank[expected].color_pred &&
          e.type_pred == bank[expected].type_pred)
        ++at_best;
    tie_cases += at_best > 1;
    if (got.size() != 1 || got[0].bank_index != bank[expected].bank_index)
      return fail("instance " + std::to_string(instance) + ": match chose " + std::to_string(got[0].bank_index) +
                  ", brute force " + std::to_string(bank[expected].bank_index));
  }
  if (tie_cases < 10) return fail("only " + std::to_string(tie_cases) + " instances exercised ties");
  return pass("50 instances agree, " + std::to_string(tie_cases) + " with exact ties at the optimum");
}

// --- 12 ---------------------------------------------------------------------

struct Shell {
  fs::path log;
  std::string last_output;

  int operator()(const std::string& args) {
    const auto out = log.parent_path() / "last.out";
    const std::string cmd = std::string("\"") + CARDNET_CLI_PATH + "\" " + args + " > \"" + out.string() +
                            "\" 2>> \"" + log.string() + "\"";
    const int rc = std::system(cmd.c_str());
    last_output = fs::exists(out) ? detail::read_text(out) : "";
    return rc;
  }

  std::string last_error() const {
    auto text = fs::exists(log) ? detail::read_text(log) : "";
    while (!text.empty() && text.back() == '\n') text.pop_back();
    return text.substr(text.rfind('\n') + 1);
  }
};

Outcome end_to_end() {
  testing::TempDir tmp("acc12");
  const auto corpus_path = testing::fixtures_dir() / "corpus.csv";
  const auto corpus = load_corpus(corpus_path, CorpusFormat::Csv);
  const auto images = tmp / "images";
  fs::create_directories(images);
  std::mt19937_64 rng(12);
  for (const auto& card : corpus.cards) {
    const auto label = card_labels(card, LabelSet::Color).front();
    detail::write_bytes(images / (card.id + ".jpg"), encode_jpeg(testing::tint_image(label, {48, 40}, rng)));
  }

  Shell sh{tmp / "stderr.log", {}};
  const std::string common = "--seed 12 --artifacts \"" + (tmp / "artifacts").string() + "\" ";
  const std::string corpus_arg = " --corpus \"" + corpus_path.string() + "\"";
  const std::vector<std::pair<std::string, std::string>> steps{
      {"build image/color", "build-dataset --kind image --labels color --images \"" + images.string() + "\"" + corpus_arg},
      {"build image/type", "build-dataset --kind image --labels type --images \"" + images.string() + "\"" + corpus_arg},
      {"build text/color", "build-dataset --kind text --labels color --max-len 32" + corpus_arg},
      {"build text/type", "build-dataset --kind text --labels type --max-len 32" + corpus_arg},
      {"train image/color", "train-image --labels color --epochs 1 --batch-size 8"},
      {"train image/type", "train-image --labels type --epochs 1 --batch-size 8"},
      {"train text/color", "train-text --labels color --epochs 1 --batch-size 8"},
      {"train text/type", "train-text --labels type --epochs 1 --batch-size 8"},
      {"train generator", "train-generator --epochs 1 --hidden-size 64 --sequence-length 50 --batch-size 4 "
                          "--max-record-chars 300" + corpus_arg},
      {"build bank", "build-bank --count 100"},
  };
  for (const auto& [name, args] : steps)
    if (const int rc = sh(common + args); rc != 0)
      return fail(name + " exited with " + std::to_string(rc) + ": " + sh.last_error());

  const auto bank = load_bank(tmp / "artifacts" / "bank.jsonl");
  if (bank.size() != 100) return fail("bank holds " + std::to_string(bank.size()) + " entries");
  // A one-epoch generator rarely emits well-formed records yet, so malformed entries stay eligible.
  const std::string match_args = "match --include-malformed --image \"" + (images / "fx-009.jpg").string() + "\"";
  if (const int rc = sh(common + match_args); rc != 0)
    return fail("match exited with " + std::to_string(rc) + ": " + sh.last_error());

  const std::regex line(R"(color: (\w+)  type: (\w+)  \(bank entry (\d+)\))");
  std::smatch m;
  if (!std::regex_search(sh.last_output, m, line)) return fail("no rendered card in match output");
  const auto& entry = bank.at(std::stoul(m[3]));
  const std::string color(entry.color_pred.argmax_label()), type(entry.type_pred.argmax_label());
  if (m[1] != color || m[2] != type)
    return fail("rendered labels " + m[1].str() + "/" + m[2].str() + " vs stored " + color + "/" + type);
  return pass("pipeline exit 0; matched bank entry " + m[3].str() + " (" + color + ", " + type + ")");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "batch format round-trip", 5, batch_roundtrip},
      {2, "multilabel expansion", 1, multilabel_expansion},
      {3, "corpus statistics", 60, era_statistics},
      {4, "classifier contract", 30, classifier_contract},
      {5, "gradient check", 60, gradient_check},
      {6, "image learning sanity", 600, image_learning},
      {7, "text learning sanity", 300, text_learning},
      {8, "generator memorization", 300, generator_memorization},
      {9, "encode/decode identity", 5, encode_decode_identity},
      {10, "distance correctness", 10, distance_correctness},
      {11, "matcher oracle equivalence", 30, matcher_equivalence},
      {12, "end-to-end smoke", 600, end_to_end},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.status == Status::Pass && seconds > c.budget_seconds) {
      outcome.status = Status::Fail;
      outcome.detail += "; over the " + fmt(c.budget_seconds, 0) + " s budget";
    }
    const char* tag = outcome.status == Status::Pass ? "PASS" : outcome.status == Status::Fail ? "FAIL" : "SKIP";
    failures += outcome.status == Status::Fail;
    std::cout << "criterion " << c.number << " " << tag << " (" << fmt(seconds, 1) << " s) " << c.name << ": "
              << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
