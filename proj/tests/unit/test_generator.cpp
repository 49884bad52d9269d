#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cardnet/card_encoding.hpp"
#include "cardnet/error.hpp"
#include "cardnet/text_generator.hpp"
#include "support.hpp"

using namespace cardnet;

namespace {

GeneratorConfig tiny_config() {
  GeneratorConfig c;
  c.hidden_size = 16;
  c.layers = 1;
  c.sequence_length = 20;
  c.batch_size = 2;
  c.epochs = 1;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("encoding format") {
  CHECK(encode_corpus(Corpus{}).empty());
  const auto one = make_card("x", "Owl", "{1}{W}", "Creature — Bird", "Owl flies. Owl lands.", std::nullopt,
                             std::string("1"), std::string("1"), "S", "");
  Corpus corpus;
  corpus.cards.push_back(one);
  const auto stream = encode_corpus(corpus);
  CHECK(std::count(stream.begin(), stream.end(), kRecordTerminator) == 1);
  CHECK(stream == "Owl|{1}{W}|Creature — Bird|1/1|{this card} flies. {this card} lands.\n");

  CardFields tricky{"A|B\\C", "{W}", "Instant", "", "line one\nline two | \\n literal"};
  const auto encoded = encode_fields(tricky);
  CHECK(encoded.find('\n') == std::string::npos);
  const auto back = decode_card(encoded);
  REQUIRE(!back.malformed());
  CHECK(*back.fields == tricky);
}

TEST_CASE("decode/encode identity on random cards") {
  std::mt19937_64 rng(21);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto card = testing::random_card(i, rng);
    const auto decoded = decode_card(encode_card(card));
    INFO(card.name);
    REQUIRE(!decoded.malformed());
    CHECK(*decoded.fields == card_fields(card));
  }
}

TEST_CASE("malformed records are flagged, never thrown") {
  for (const char* raw : {"no delimiters at all", "a|b|c|d", "a|b|c|d|e|f", "|{1}|Instant||text",
                          "Name|{1}||1/1|text", "Name|{1|Instant||text", "Name|{1}|Instant||dangling\\",
                          "Name|{1}|Instant||bad \\q escape", "Name|{1}|Instant||split\nrecord"}) {
    INFO(raw);
    const auto d = decode_card(raw);
    CHECK(d.malformed());
    CHECK(!d.reason.empty());
  }
  const auto example = decode_card(
      "Warden Owl|{2}{W}{U}|Creature — Bird|2/2|Flying. When {this card} enters the battlefield, detain target "
      "creature an opponent controls.\n");
  REQUIRE(!example.malformed());
  CHECK(example.fields->rules_text.find("When {this card} enters the battlefield, detain") == 8);
  const auto upkeep = decode_card("Verdant Cycle|{1}{G}|Enchantment||Cumulative upkeep {1}. Pay {3G}.");
  REQUIRE(!upkeep.malformed());
  CHECK(upkeep.fields->power_toughness.empty());
}

TEST_CASE("LSTM gradients match finite differences") {
  std::mt19937_64 rng(5);
  CharLstm<double> net(5, 4, 2, 0.4, rng);
  const std::size_t batch = 2;
  const std::vector<std::int32_t> warm_in{0, 1, 2, 3}, warm_tg{1, 2, 3, 4};
  const std::vector<std::int32_t> in{1, 4, 2, 0, 3, 3, 0, 2}, tg{4, 2, 0, 3, 3, 1, 2, 4};
  auto params = net.params();
  auto start = net.zero_state(batch);
  net.train_chunk(warm_in, warm_tg, start, 1.0);  // non-zero carried state
  for (auto* p : params) p->zero_grad();
  auto s0 = start;
  net.train_chunk(in, tg, s0, 1.0);
  std::vector<std::vector<double>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);
  auto loss = [&] {
    auto s = start;
    const double l = net.train_chunk(in, tg, s, 1.0);
    for (auto* p : params) p->zero_grad();
    return l;
  };
  std::uniform_int_distribution<int> coin(0, 2);
  double worst = 0;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < params.size(); ++k)
    for (std::size_t i = 0; i < params[k]->size(); ++i) {
      if (coin(rng) != 0) continue;
      auto& v = params[k]->value[i];
      const double saved = v;
      v = saved + 1e-5;
      const double up = loss();
      v = saved - 1e-5;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / 2e-5;
      // Summed loss of ~10 nats leaves ~1e-10 of rounding noise in the quotient,
      // so tiny gradients are measured against a 1e-4 floor.
      const double scale = std::max({std::abs(numeric), std::abs(analytic[k][i]), 1e-4});
      worst = std::max(worst, std::abs(numeric - analytic[k][i]) / scale);
      ++checked;
    }
  CHECK(checked > 60);
  CHECK(worst <= 1e-5);
}

TEST_CASE("generator training, sampling and persistence") {
  CHECK_THROWS_AS(train_generator(tiny_config(), ""), InputError);
  CHECK_THROWS_AS(TextGenerator(tiny_config(), "abc"), ConfigError);
  CHECK_THROWS_AS(TextGenerator(tiny_config(), "\nba"), ConfigError);

  const std::string stream = "Bolt|{R}|Instant||Deal 3.\nBear|{1}{G}|Creature — Bear|2/2|\n";
  auto trained = train_generator(tiny_config(), stream);
  REQUIRE(trained.report.epochs.size() == 1);
  CHECK(std::isfinite(trained.report.epochs[0].train_loss));
  const auto& gen = trained.model;
  CHECK(gen.alphabet().front() == '\n');

  const auto one = gen.sample(1, 0.8, 1);
  CHECK(one.size() == 1);
  const auto a = gen.sample(7, 0.8, 42), b = gen.sample(7, 0.8, 42);
  CHECK(a.size() == 7);
  CHECK(a == b);
  for (const auto& r : a) {
    CHECK(r.find('\n') == std::string::npos);
    CHECK(r.size() <= gen.config().max_record_chars);
  }
  CHECK(gen.sample(7, 0.8, 43) != a);
  CHECK_THROWS_AS(gen.sample(1, 0.0, 1), ConfigError);

  testing::TempDir tmp;
  gen.save(tmp / "g.model");
  const auto loaded = TextGenerator::load(tmp / "g.model");
  CHECK(loaded.alphabet() == gen.alphabet());
  CHECK(loaded.sample(7, 0.8, 42) == a);
  CHECK_THROWS_AS(gen.encode("unseen ~ chars"), InputError);
}

TEST_CASE("records are cut at the configured length") {
  auto config = tiny_config();
  config.max_record_chars = 5;
  auto trained = train_generator(config, "abcdefghijklmnopqrstuvwxyz abcdefghijklmnopqrstuvwxyz");
  for (const auto& r : trained.model.sample(20, 1.0, 9)) CHECK(r.size() <= 5);
}
