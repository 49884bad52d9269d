#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cardnet/card_bank.hpp"
#include "cardnet/error.hpp"
#include "io.hpp"
#include "cardnet/matcher.hpp"
#include "support.hpp"

using namespace cardnet;

namespace {

TextClassifier untrained(LabelSet labels, std::uint64_t seed) {
  Vocabulary vocab({"draw", "card", "creature", "flying", "target"});
  TextCNNConfig c;
  c.vocab_size = vocab.size();
  c.embedding_dim = 6;
  c.filters_per_width = 3;
  c.max_len = 12;
  c.labels = labels;
  c.seed = seed;
  return TextClassifier(c, vocab);
}

TextGenerator tiny_generator() {
  GeneratorConfig c;
  c.hidden_size = 12;
  c.layers = 1;
  c.sequence_length = 16;
  c.batch_size = 2;
  c.epochs = 1;
  c.seed = 9;
  return train_generator(c, "Bolt|{R}|Instant||Deal 3.\nBear|{1}{G}|Creature — Bear|2/2|\n").model;
}

MatchQuery random_query(std::mt19937_64& rng) {
  return {PredictionVector(LabelSet::Color, testing::random_distribution(kColorLabelCount, rng)),
          PredictionVector(LabelSet::Type, testing::random_distribution(kTypeLabelCount, rng))};
}

}  // namespace

TEST_CASE("normalize clamps and renormalizes") {
  // Owl example: the raw type scores contain a negative entry.
  const std::vector<double> type_raw{55.11, 26.66, -5.36, 12.87, 0.0};
  const auto t = normalize(LabelSet::Type, type_raw);
  CHECK(t.score("Enchantment") == 0.0);
  CHECK(t.score("Creature") == doctest::Approx(55.11 / 94.64).epsilon(1e-12));
  CHECK(t.score("Artifact") == doctest::Approx(26.66 / 94.64).epsilon(1e-12));
  CHECK(t.score("InstantSorcery") == doctest::Approx(12.87 / 94.64).epsilon(1e-12));
  CHECK(t.argmax_label() == "Creature");

  const std::vector<double> color_raw{29.03, 29.49, 15.80, 14.65, 11.04, 0.0};
  const auto c = normalize(LabelSet::Color, color_raw);
  CHECK(c.argmax_label() == "Blue");
  CHECK(c.score("Colorless") == 0.0);

  const std::vector<double> zeros(5, 0.0), negatives{-1, -2, 0, -3, -4};
  for (const auto* raw : {&zeros, &negatives}) {
    const auto uniform = normalize(LabelSet::Type, *raw);
    for (double s : uniform.scores()) CHECK(s == doctest::Approx(0.2));
  }

  CHECK_THROWS_AS(normalize(LabelSet::Type, std::vector<double>{}), InputError);
  CHECK_THROWS_AS(normalize(LabelSet::Type, color_raw), InputError);
  const std::vector<double> nan{1, std::numeric_limits<double>::quiet_NaN(), 0, 0, 0};
  CHECK_THROWS_AS(normalize(LabelSet::Type, nan), InputError);
}

TEST_CASE("label distance") {
  // Multicolor image prediction against a text prediction; hand-summed distance is 0.4100.
  const PredictionVector image(LabelSet::Color, {0.2749, 0.0973, 0.2714, 0.0849, 0.2715, 0.0});
  const PredictionVector text(LabelSet::Color, {0.1779, 0.2637, 0.1634, 0.1216, 0.2734, 0.0});
  CHECK(std::abs(label_distance(image, text) - 0.4100) <= 1e-4);

  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    const PredictionVector a(LabelSet::Color, testing::random_distribution(6, rng));
    const PredictionVector b(LabelSet::Color, testing::random_distribution(6, rng));
    const PredictionVector c(LabelSet::Color, testing::random_distribution(6, rng));
    CHECK(label_distance(a, a) == 0.0);
    CHECK(label_distance(a, b) == label_distance(b, a));
    CHECK(label_distance(a, b) >= 0.0);
    CHECK(label_distance(a, b) <= 2.0 + 1e-12);
    CHECK(label_distance(a, c) <= label_distance(a, b) + label_distance(b, c) + 1e-12);
  }
  const PredictionVector t(LabelSet::Type, {1, 0, 0, 0, 0});
  const PredictionVector col(LabelSet::Color, {1, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(label_distance(t, col), InputError);
}

TEST_CASE("match agrees with a brute-force scan") {
  std::mt19937_64 rng(31);
  for (int instance = 0; instance < 20; ++instance) {
    auto bank = testing::random_bank(200, 0.3, rng);
    auto query = random_query(rng);
    query.w_color = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    query.w_type = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    // Make the query an exact tie target now and then.
    if (instance % 3 == 0) {
      query.color = bank[150].color_pred;
      query.type = bank[150].type_pred;
    }
    const auto expected = testing::brute_force_match(query, bank);
    const auto got = match(query, bank);
    REQUIRE(got.size() == 1);
    CHECK(got[0].bank_index == bank[expected].bank_index);
    CHECK(got[0].raw == bank[expected].raw);
    CHECK(got[0].score == doctest::Approx(query.w_color * got[0].color_distance + query.w_type * got[0].type_distance));
  }
}

TEST_CASE("top-k ordering, ties and malformed entries") {
  std::mt19937_64 rng(4);
  auto bank = testing::random_bank(30, 0.0, rng);
  // Entries 5, 12 and 20 are exact duplicates.
  bank[12].color_pred = bank[20].color_pred = bank[5].color_pred;
  bank[12].type_pred = bank[20].type_pred = bank[5].type_pred;
  MatchQuery q{bank[5].color_pred, bank[5].type_pred};
  q.k = 4;
  auto top = match(q, bank);
  REQUIRE(top.size() == 4);
  CHECK(top[0].bank_index == 5);
  CHECK(top[1].bank_index == 12);
  CHECK(top[2].bank_index == 20);
  CHECK(top[0].score == 0.0);
  CHECK(top[3].score >= top[2].score);

  bank[5].malformed = true;
  bank[5].decoded.reset();
  q.k = 1;
  CHECK(match(q, bank)[0].bank_index == 12);
  q.include_malformed = true;
  CHECK(match(q, bank)[0].bank_index == 5);

  q.k = 100;
  CHECK(match(q, bank).size() == bank.size());

  auto all_bad = bank;
  for (auto& e : all_bad) {
    e.malformed = true;
    e.decoded.reset();
  }
  q.include_malformed = false;
  CHECK_THROWS_AS(match(q, all_bad), InputError);
  CHECK_THROWS_AS(match(q, std::span<const BankEntry>{}), InputError);
}

TEST_CASE("query validation, digest and JSON") {
  std::mt19937_64 rng(6);
  auto q = random_query(rng);
  CHECK_NOTHROW(q.validate());
  auto bad = q;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = q;
  bad.w_color = -1;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = q;
  bad.w_color = bad.w_type = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  MatchQuery swapped{q.type, q.color};
  CHECK_THROWS_AS(swapped.validate(), InputError);

  CHECK(query_digest(q) == query_digest(q));
  CHECK(query_digest(q).size() == 64);
  auto other = q;
  other.w_type = 0.5;
  CHECK(query_digest(other) != query_digest(q));

  const auto bank = testing::random_bank(10, 0.0, rng);
  q.k = 3;
  const auto results = match(q, bank);
  const auto j = match_to_json(q, results);
  CHECK(j.at("query_digest") == query_digest(q));
  REQUIRE(j.at("results").size() == 3);
  CHECK(j.at("results")[0].at("bank_index") == results[0].bank_index);
}

TEST_CASE("render_card") {
  std::mt19937_64 rng(2);
  auto entry = testing::random_bank(1, 0.0, rng).front();
  entry.bank_index = 7;
  entry.color_pred = PredictionVector(LabelSet::Color, {0, 1, 0, 0, 0, 0});
  entry.type_pred = PredictionVector(LabelSet::Type, {0, 0, 0, 1, 0});
  const auto text = render_card(entry);
  CHECK(text.find(entry.decoded->name) == 0);
  CHECK(text.find("color: Blue  type: InstantSorcery  (bank entry 7)\n") != std::string::npos);
  entry.malformed = true;
  entry.decoded.reset();
  CHECK(render_card(entry).find("[malformed] ") == 0);
}

TEST_CASE("bank entries and files") {
  std::mt19937_64 rng(8);
  Bank bank{testing::random_bank(12, 0.2, rng), {}};
  bank.entries[3].malformed = true;
  bank.entries[3].decoded.reset();
  bank.entries[3].raw = "broken|record";
  bank.manifest.count = 12;
  bank.manifest.malformed_count = 1;

  for (const auto& e : bank.entries) {
    const auto back = BankEntry::from_json(e.to_json());
    CHECK(back.bank_index == e.bank_index);
    CHECK(back.raw == e.raw);
    CHECK(back.decoded == e.decoded);
    CHECK(back.color_pred == e.color_pred);
    CHECK(back.type_pred == e.type_pred);
    CHECK(back.malformed == e.malformed);
  }
  auto inconsistent = bank.entries[0].to_json();
  inconsistent["malformed"] = true;
  CHECK_THROWS_AS(BankEntry::from_json(inconsistent), FormatError);

  testing::TempDir tmp;
  const auto path = tmp / "bank.jsonl";
  write_bank(path, bank);
  CHECK(std::filesystem::exists(bank_manifest_path(path)));
  const auto loaded = load_bank(path);
  REQUIRE(loaded.size() == 12);
  CHECK(loaded[3].malformed);
  CHECK(loaded[11].raw == bank.entries[11].raw);

  auto gap = bank;
  gap.entries.erase(gap.entries.begin() + 4);
  write_bank(tmp / "gap.jsonl", gap);
  CHECK_THROWS_AS(load_bank(tmp / "gap.jsonl"), FormatError);
  detail::write_text(tmp / "junk.jsonl", "{not json\n");
  CHECK_THROWS_AS(load_bank(tmp / "junk.jsonl"), FormatError);
  CHECK_THROWS_AS(load_bank(tmp / "missing.jsonl"), LoadError);
}

TEST_CASE("bank building") {
  const auto gen = tiny_generator();
  const auto color = untrained(LabelSet::Color, 1), type = untrained(LabelSet::Type, 2);
  CHECK_THROWS_AS(classify_records(std::vector<std::string>{"x"}, type, color), ConfigError);

  const auto bank = build_card_bank(gen, 25, 0.9, 77, color, type);
  REQUIRE(bank.entries.size() == 25);
  std::size_t malformed = 0;
  for (std::size_t i = 0; i < bank.entries.size(); ++i) {
    const auto& e = bank.entries[i];
    CHECK(e.bank_index == i);
    CHECK(e.malformed == !e.decoded.has_value());
    malformed += e.malformed;
    const auto decoded = decode_card(e.raw);
    CHECK(e.color_pred == color.predict_text(bank_classifier_text(decoded, e.raw)));
  }
  CHECK(bank.manifest.malformed_count == malformed);
  CHECK(bank.manifest.count == 25);
  CHECK(bank.manifest.generator_seed == 77);

  testing::TempDir tmp;
  gen.save(tmp / "g.model");
  color.save(tmp / "c.model");
  type.save(tmp / "t.model");
  const auto m1 = build_card_bank(tmp / "g.model", tmp / "c.model", tmp / "t.model", 25, 0.9, 77, tmp / "a.jsonl");
  const auto m2 = build_card_bank(tmp / "g.model", tmp / "c.model", tmp / "t.model", 25, 0.9, 77, tmp / "b.jsonl");
  CHECK(detail::read_bytes(tmp / "a.jsonl") == detail::read_bytes(tmp / "b.jsonl"));
  CHECK(m1.generator_sha256 == detail::sha256_hex(detail::read_bytes(tmp / "g.model")));
  CHECK(m1.to_json() == m2.to_json());
  CHECK(BankManifest::from_json(m1.to_json()).to_json() == m1.to_json());
  CHECK(load_bank(tmp / "a.jsonl").size() == 25);
}
