#include "cardnet/card.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cardnet/error.hpp"
#include "csv.hpp"

namespace cardnet {

using nlohmann::json;

int ColorSet::count() const { return std::popcount(bits_); }
int TypeSet::count() const { return std::popcount(bits_); }

std::vector<TypeLabel> TypeSet::labels() const {
  std::vector<TypeLabel> out;
  for (std::size_t i = 0; i < kTypeLabelCount; ++i)
    if (has(static_cast<TypeLabel>(i))) out.push_back(static_cast<TypeLabel>(i));
  return out;
}

std::optional<Color> color_from_letter(char c) {
  switch (c) {
    case 'W': return Color::W;
    case 'U': return Color::U;
    case 'B': return Color::B;
    case 'R': return Color::R;
    case 'G': return Color::G;
    default: return std::nullopt;
  }
}

char color_letter(Color c) { return "WUBRG"[static_cast<int>(c)]; }

std::string ColorIdentity::code() const {
  if (colorless()) return "Cl";
  std::string out;
  for (std::size_t i = 0; i < kColorCount; ++i)
    if (has(static_cast<Color>(i))) out.push_back(color_letter(static_cast<Color>(i)));
  return out;
}

std::vector<ColorLabel> ColorIdentity::labels() const {
  if (colorless()) return {ColorLabel::Colorless};
  std::vector<ColorLabel> out;
  for (std::size_t i = 0; i < kColorCount; ++i)
    if (has(static_cast<Color>(i))) out.push_back(static_cast<ColorLabel>(i));
  return out;
}

// ---------------------------------------------------------------------------
// Mana symbols

ManaSymbol classify_symbol(std::string_view body) {
  ManaSymbol sym;
  sym.text = std::string(body);

  if (!body.empty() && std::all_of(body.begin(), body.end(), [](unsigned char c) { return std::isdigit(c); })) {
    sym.kind = ManaSymbol::Kind::Generic;
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    sym.numeric_value = ec == std::errc{} ? value : 0;
    return sym;
  }
  if (body.size() == 1) {
    if (auto c = color_from_letter(body[0])) {
      sym.kind = ManaSymbol::Kind::Colored;
      sym.colors.add(*c);
      return sym;
    }
    if (body[0] == 'X' || body[0] == 'Y' || body[0] == 'Z') {
      sym.kind = ManaSymbol::Kind::Variable;
      return sym;
    }
  }
  if (body.size() == 3 && body[1] == '/') {
    auto a = color_from_letter(body[0]);
    auto b = color_from_letter(body[2]);
    if (a && b && *a != *b) {
      sym.kind = ManaSymbol::Kind::Hybrid;
      sym.colors.add(*a);
      sym.colors.add(*b);
      return sym;
    }
  }
  sym.kind = ManaSymbol::Kind::Other;
  for (char ch : body)
    if (auto c = color_from_letter(ch)) sym.colors.add(*c);
  return sym;
}

std::vector<ManaSymbol> parse_mana_cost(std::string_view raw) {
  std::vector<ManaSymbol> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '}') throw ParseError("unbalanced '}' in mana cost", i);
    if (c != '{') throw ParseError(std::string("unexpected character '") + c + "' in mana cost", i);
    std::size_t close = raw.find_first_of("{}", i + 1);
    if (close == std::string_view::npos || raw[close] == '{')
      throw ParseError("unbalanced '{' in mana cost", i);
    if (close == i + 1) throw ParseError("empty mana symbol", i);
    out.push_back(classify_symbol(raw.substr(i + 1, close - i - 1)));
    i = close + 1;
  }
  return out;
}

ColorSet colors_in_text(std::string_view text) {
  ColorSet colors;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    std::size_t close = text.find_first_of("{}", pos + 1);
    if (close == std::string_view::npos) break;
    if (text[close] == '{') {
      pos = close;
      continue;
    }
    auto body = text.substr(pos + 1, close - pos - 1);
    // Placeholders such as "{this card}" are not symbols.
    bool symbol_like = std::none_of(body.begin(), body.end(), [](unsigned char ch) {
      return std::islower(ch) || std::isspace(ch);
    });
    if (symbol_like && !body.empty()) colors |= classify_symbol(body).colors;
    pos = close + 1;
  }
  return colors;
}

ColorIdentity derive_color_identity(const Card& card) {
  ColorSet colors;
  for (const auto& sym : card.mana_cost) colors |= sym.colors;
  colors |= colors_in_text(card.rules_text);
  return ColorIdentity(colors);
}

// ---------------------------------------------------------------------------
// Type lines

namespace {

constexpr std::array<std::string_view, 7> kMainTypes = {
    "Creature", "Land", "Artifact", "Enchantment", "Instant", "Sorcery", "Planeswalker"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

// Drop the subtype part of one face: everything after an em dash or " - ".
std::string_view supertypes_part(std::string_view face) {
  std::size_t cut = face.size();
  for (std::string_view sep : {std::string_view("\xE2\x80\x94"), std::string_view(" - "), std::string_view("--")}) {
    auto p = face.find(sep);
    if (p != std::string_view::npos) cut = std::min(cut, p);
  }
  return face.substr(0, cut);
}

}  // namespace

std::vector<std::string> main_type_words(std::string_view type_line) {
  std::array<bool, kMainTypes.size()> seen{};
  std::size_t start = 0;
  while (start <= type_line.size()) {
    auto slash = type_line.find("//", start);
    auto face = type_line.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    auto head = supertypes_part(face);
    std::size_t i = 0;
    while (i < head.size()) {
      while (i < head.size() && std::isspace(static_cast<unsigned char>(head[i]))) ++i;
      std::size_t j = i;
      while (j < head.size() && !std::isspace(static_cast<unsigned char>(head[j]))) ++j;
      auto word = head.substr(i, j - i);
      for (std::size_t k = 0; k < kMainTypes.size(); ++k)
        if (iequals(word, kMainTypes[k])) seen[k] = true;
      i = j;
    }
    if (slash == std::string_view::npos) break;
    start = slash + 2;
  }
  std::vector<std::string> out;
  for (std::size_t k = 0; k < kMainTypes.size(); ++k)
    if (seen[k]) out.emplace_back(kMainTypes[k]);
  return out;
}

TypeSet parse_type_line(std::string_view raw) {
  TypeSet types;
  for (const auto& word : main_type_words(raw)) {
    if (word == "Creature") types.add(TypeLabel::Creature);
    else if (word == "Artifact") types.add(TypeLabel::Artifact);
    else if (word == "Enchantment") types.add(TypeLabel::Enchantment);
    else if (word == "Instant" || word == "Sorcery") types.add(TypeLabel::InstantSorcery);
    else if (word == "Land") types.add(TypeLabel::Land);
  }
  return types;
}

std::string render_type_line(TypeSet types) {
  // Adjective-like types first, as printed on cards ("Artifact Creature").
  static constexpr std::array<std::pair<TypeLabel, std::string_view>, 5> kOrder = {{
      {TypeLabel::Artifact, "Artifact"},
      {TypeLabel::Enchantment, "Enchantment"},
      {TypeLabel::Land, "Land"},
      {TypeLabel::Creature, "Creature"},
      {TypeLabel::InstantSorcery, "Instant"},
  }};
  std::string out;
  for (const auto& [label, word] : kOrder) {
    if (!types.has(label)) continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus loading

Card make_card(std::string id, std::string name, std::string mana_cost, std::string type_line,
               std::string rules_text, std::optional<std::string> flavor,
               std::optional<std::string> power, std::optional<std::string> toughness,
               std::string set_code, std::string image_ref) {
  Card card;
  if (name.empty()) throw InputError("name: empty");
  if (type_line.empty()) throw InputError("type: empty");
  try {
    card.mana_cost = parse_mana_cost(mana_cost);
  } catch (const ParseError& e) {
    throw InputError(std::string("manaCost: ") + e.what());
  }
  card.id = id.empty() ? (set_code.empty() ? name : set_code + ":" + name) : std::move(id);
  card.name = std::move(name);
  card.mana_cost_raw = std::move(mana_cost);
  card.main_types = main_type_words(type_line);
  card.types = parse_type_line(type_line);
  card.type_line = std::move(type_line);
  card.rules_text = std::move(rules_text);
  if (flavor && !flavor->empty()) card.flavor_text = std::move(flavor);
  if ((power && !power->empty()) || (toughness && !toughness->empty()))
    card.power_toughness = std::make_pair(power.value_or(""), toughness.value_or(""));
  card.set_code = std::move(set_code);
  card.image_ref = std::move(image_ref);
  card.color_identity = derive_color_identity(card);
  return card;
}

const Card* Corpus::find(std::string_view id) const {
  for (const auto& c : cards)
    if (c.id == id) return &c;
  return nullptr;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "csv") return CorpusFormat::Csv;
  if (name == "json") return CorpusFormat::Json;
  throw LoadError("unknown corpus format '" + std::string(name) + "'");
}

CorpusFormat corpus_format_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? CorpusFormat::Json : CorpusFormat::Csv;
}

namespace {

struct RawRow {
  std::string id, name, mana, type, text, set, image;
  std::optional<std::string> flavor, power, toughness;
};

// Split "field: reason" produced by make_card.
Reject reject_from(std::size_t row, const std::string& what) {
  auto colon = what.find(": ");
  if (colon == std::string::npos) return {row, "row", what};
  return {row, what.substr(0, colon), what.substr(colon + 2)};
}

void add_row(Corpus& corpus, std::unordered_set<std::string>& ids, std::size_t row, RawRow r) {
  try {
    Card card = make_card(std::move(r.id), std::move(r.name), std::move(r.mana), std::move(r.type),
                          std::move(r.text), std::move(r.flavor), std::move(r.power),
                          std::move(r.toughness), std::move(r.set), std::move(r.image));
    if (!ids.insert(card.id).second) {
      corpus.rejects.push_back({row, "id", "duplicate id '" + card.id + "'"});
      return;
    }
    corpus.cards.push_back(std::move(card));
  } catch (const InputError& e) {
    corpus.rejects.push_back(reject_from(row, e.what()));
  }
}

}  // namespace

Corpus parse_corpus_csv(std::string_view text) {
  auto rows = detail::parse_csv(text);
  if (rows.empty()) throw LoadError("corpus CSV has no header");
  const auto& header = rows.front();
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  auto require = [&](std::string_view name) {
    auto c = column(name);
    if (!c) throw LoadError("corpus CSV is missing mandatory column '" + std::string(name) + "'");
    return *c;
  };
  const std::size_t c_name = require("name"), c_mana = require("manaCost"), c_type = require("type"),
                    c_text = require("text");
  const auto c_id = column("id"), c_flavor = column("flavor"), c_power = column("power"),
             c_tough = column("toughness"), c_set = column("set"), c_image = column("imageUrl");

  Corpus corpus;
  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    auto get = [&](std::optional<std::size_t> c) -> std::string {
      return c && *c < row.size() ? row[*c] : std::string();
    };
    auto opt = [&](std::optional<std::size_t> c) -> std::optional<std::string> {
      if (!c || *c >= row.size()) return std::nullopt;
      return row[*c];
    };
    RawRow raw{get(c_id), get(c_name), get(c_mana), get(c_type), get(c_text), get(c_set), get(c_image),
               opt(c_flavor), opt(c_power), opt(c_tough)};
    add_row(corpus, ids, r, std::move(raw));
  }
  return corpus;
}

Corpus parse_corpus_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("corpus JSON: ") + e.what());
  }
  if (!doc.is_array()) throw LoadError("corpus JSON must be an array of card objects");

  auto field = [](const json& obj, const char* key) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
  };

  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::size_t row = 0;
  for (const auto& obj : doc) {
    ++row;
    if (!obj.is_object()) {
      corpus.rejects.push_back({row, "row", "not an object"});
      continue;
    }
    RawRow raw{field(obj, "id").value_or(""),       field(obj, "name").value_or(""),
               field(obj, "manaCost").value_or(""), field(obj, "type").value_or(""),
               field(obj, "text").value_or(""),     field(obj, "set").value_or(""),
               field(obj, "imageUrl").value_or(""), field(obj, "flavor"),
               field(obj, "power"),                 field(obj, "toughness")};
    add_row(corpus, ids, row, std::move(raw));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open corpus file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Corpus corpus = format == CorpusFormat::Csv ? parse_corpus_csv(buf.str()) : parse_corpus_json(buf.str());
  corpus.source.files.push_back(path.string());
  return corpus;
}

std::string corpus_to_json(const Corpus& corpus) {
  json arr = json::array();
  for (const auto& c : corpus.cards) {
    json obj{{"id", c.id},     {"name", c.name},       {"manaCost", c.mana_cost_raw},
             {"type", c.type_line}, {"text", c.rules_text}, {"set", c.set_code},
             {"imageUrl", c.image_ref}};
    if (c.flavor_text) obj["flavor"] = *c.flavor_text;
    if (c.power_toughness) {
      obj["power"] = c.power_toughness->first;
      obj["toughness"] = c.power_toughness->second;
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(1) + "\n";
}

std::string rejects_report(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.rejects)
    out += "row " + std::to_string(r.row) + "\t" + r.field + "\t" + r.reason + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

std::size_t CorpusStats::color_count(std::string_view code) const {
  for (const auto& r : colors)
    if (r.category == code) return r.count;
  return 0;
}

std::size_t CorpusStats::type_count(std::string_view combo) const {
  for (const auto& r : types)
    if (r.category == combo) return r.count;
  return 0;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.total = corpus.cards.size();
  auto pct = [&](std::size_t n) { return stats.total ? 100.0 * double(n) / double(stats.total) : 0.0; };

  std::array<std::size_t, 32> by_mask{};
  std::map<std::string, std::size_t> by_combo;
  for (const auto& c : corpus.cards) {
    ++by_mask[c.color_identity.bits()];
    if (c.color_identity.multicolored()) ++stats.multicolored;
    std::string combo;
    for (const auto& t : c.main_types) combo += (combo.empty() ? "" : "/") + t;
    ++by_combo[combo.empty() ? "(none)" : combo];
  }

  std::vector<std::uint8_t> masks(32);
  for (std::uint8_t m = 0; m < 32; ++m) masks[m] = m;
  std::stable_sort(masks.begin(), masks.end(), [&](std::uint8_t a, std::uint8_t b) {
    if (by_mask[a] != by_mask[b]) return by_mask[a] > by_mask[b];
    if (std::popcount(a) != std::popcount(b)) return std::popcount(a) < std::popcount(b);
    return a < b;
  });
  for (auto m : masks) stats.colors.push_back({ColorIdentity(m).code(), by_mask[m], pct(by_mask[m])});

  for (const auto& [combo, n] : by_combo) stats.types.push_back({combo, n, pct(n)});
  std::stable_sort(stats.types.begin(), stats.types.end(),
                   [](const StatRow& a, const StatRow& b) { return a.count > b.count; });

  stats.multicolored_percent = pct(stats.multicolored);
  return stats;
}

std::string stats_csv(const CorpusStats& stats) {
  std::string out = "category,count,percent\n";
  auto line = [&](const std::string& cat, std::size_t n, double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ",%zu,%.2f\n", n, p);
    out += detail::csv_escape(cat) + buf;
  };
  line("total", stats.total, stats.total ? 100.0 : 0.0);
  for (const auto& r : stats.colors) line("color:" + r.category, r.count, r.percent);
  for (const auto& r : stats.types) line("type:" + r.category, r.count, r.percent);
  line("multicolored", stats.multicolored, stats.multicolored_percent);
  return out;
}

}  // namespace cardnet
