#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cardnet/labels.hpp"

namespace cardnet {

enum class Color : std::uint8_t { W = 0, U, B, R, G };
inline constexpr std::size_t kColorCount = 5;

/// Set of colors stored as a 5-bit mask in (W, U, B, R, G) order.
class ColorSet {
 public:
  constexpr ColorSet() = default;
  constexpr explicit ColorSet(std::uint8_t bits) : bits_(bits & 0x1f) {}

  constexpr bool has(Color c) const { return (bits_ >> static_cast<int>(c)) & 1u; }
  constexpr void add(Color c) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<int>(c)); }
  constexpr ColorSet operator|(ColorSet o) const { return ColorSet(bits_ | o.bits_); }
  constexpr ColorSet& operator|=(ColorSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  int count() const;
  constexpr bool operator==(const ColorSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Color identity: the point in {0,1}^5. Empty means Colorless.
class ColorIdentity : public ColorSet {
 public:
  using ColorSet::ColorSet;
  constexpr ColorIdentity(ColorSet s) : ColorSet(s) {}  // NOLINT

  bool colorless() const { return empty(); }
  bool multicolored() const { return count() >= 2; }
  /// "W", "WUG", ..., or "Cl" for colorless.
  std::string code() const;
  /// Labels of the 6-way color label set. Colorless yields {Colorless}.
  std::vector<ColorLabel> labels() const;
};

std::optional<Color> color_from_letter(char c);
char color_letter(Color c);

struct ManaSymbol {
  enum class Kind : std::uint8_t { Generic, Colored, Hybrid, Variable, Other };

  Kind kind = Kind::Other;
  ColorSet colors;
  unsigned numeric_value = 0;
  /// Token text without the braces, e.g. "W/U".
  std::string text;

  bool operator==(const ManaSymbol&) const = default;
};

/// Parse a brace-delimited cost such as "{2}{W}{U}". Throws ParseError with the
/// byte offset of the first unbalanced brace or stray character.
std::vector<ManaSymbol> parse_mana_cost(std::string_view raw);

/// Classify a single token body (no braces).
ManaSymbol classify_symbol(std::string_view body);

/// Colors of every brace-delimited symbol in free text. Unbalanced braces are ignored.
ColorSet colors_in_text(std::string_view text);

/// Set of merged type labels as a bit mask.
class TypeSet {
 public:
  constexpr TypeSet() = default;
  constexpr explicit TypeSet(std::uint8_t bits) : bits_(bits & 0x1f) {}
  constexpr bool has(TypeLabel t) const { return (bits_ >> static_cast<int>(t)) & 1u; }
  constexpr void add(TypeLabel t) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<int>(t)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  int count() const;
  std::vector<TypeLabel> labels() const;
  constexpr bool operator==(const TypeSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Recognized main type words in canonical order:
/// Creature, Land, Artifact, Enchantment, Instant, Sorcery, Planeswalker.
std::vector<std::string> main_type_words(std::string_view type_line);

/// Maps main types to labels. Instant and Sorcery merge; Planeswalker and
/// unrecognized words are dropped.
TypeSet parse_type_line(std::string_view raw);

/// Inverse of parse_type_line on the label vocabulary, e.g. "Artifact Creature".
std::string render_type_line(TypeSet types);

struct Card {
  std::string id;
  std::string name;
  std::string mana_cost_raw;
  std::vector<ManaSymbol> mana_cost;
  std::string type_line;
  std::vector<std::string> main_types;
  TypeSet types;
  std::string rules_text;
  std::optional<std::string> flavor_text;
  std::optional<std::pair<std::string, std::string>> power_toughness;
  std::string set_code;
  ColorIdentity color_identity;
  std::string image_ref;

  /// True when the card has no type label left after merging/exclusion.
  bool excluded_from_type_dataset() const { return types.empty(); }
  bool operator==(const Card&) const = default;
};

ColorIdentity derive_color_identity(const Card& card);

struct Reject {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string field;
  std::string reason;
  bool operator==(const Reject&) const = default;
};

struct SourceManifest {
  std::vector<std::string> files;
  std::vector<std::string> fetched_at;
};

struct Corpus {
  std::vector<Card> cards;
  SourceManifest source;
  std::vector<Reject> rejects;

  const Card* find(std::string_view id) const;
};

enum class CorpusFormat { Csv, Json };
CorpusFormat parse_corpus_format(std::string_view name);
/// Guess from the file extension; defaults to CSV.
CorpusFormat corpus_format_for(const std::filesystem::path& path);

/// Build a Card from raw field values. Throws ParseError/InputError on bad
/// mandatory fields; the field name is carried in the InputError message.
Card make_card(std::string id, std::string name, std::string mana_cost, std::string type_line,
               std::string rules_text, std::optional<std::string> flavor,
               std::optional<std::string> power, std::optional<std::string> toughness,
               std::string set_code, std::string image_ref);

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus parse_corpus_csv(std::string_view text);
Corpus parse_corpus_json(std::string_view text);

/// Serialize in the JSON input schema so that the output reloads identically.
std::string corpus_to_json(const Corpus& corpus);
/// One line per reject: "row <n>\t<field>\t<reason>".
std::string rejects_report(const Corpus& corpus);

struct StatRow {
  std::string category;
  std::size_t count = 0;
  double percent = 0.0;
};

struct CorpusStats {
  std::size_t total = 0;
  /// All 32 identity subsets, sorted descending by count then code.
  std::vector<StatRow> colors;
  /// Exact main-type combinations present, sorted descending; "(none)" for untyped.
  std::vector<StatRow> types;
  std::size_t multicolored = 0;
  double multicolored_percent = 0.0;

  std::size_t color_count(std::string_view code) const;
  std::size_t type_count(std::string_view combo) const;
};

CorpusStats corpus_stats(const Corpus& corpus);
/// CSV with header "category,count,percent".
std::string stats_csv(const CorpusStats& stats);

}  // namespace cardnet
