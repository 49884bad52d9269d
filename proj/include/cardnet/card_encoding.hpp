#pragma once

// Character-stream encoding of cards for the generator.
//
//   name|mana cost|type line|power/toughness|rules text\n
//
// '|' separates fields and '\n' terminates a record. Inside a field, '\\' is
// written as "\\\\", '|' as "\\|" and a newline as "\\n", so neither reserved
// character ever appears unescaped in field content. The card's own name in
// the rules text is replaced by "{this card}".

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cardnet/card.hpp"

namespace cardnet {

inline constexpr char kFieldDelimiter = '|';
inline constexpr char kRecordTerminator = '\n';
inline constexpr std::size_t kEncodedFieldCount = 5;

struct CardFields {
  std::string name;
  std::string mana_cost;
  std::string type_line;
  /// "power/toughness", or empty when the card has none.
  std::string power_toughness;
  /// Rules text with the self-reference placeholder.
  std::string rules_text;

  bool operator==(const CardFields&) const = default;
};

CardFields card_fields(const Card& card);

/// One record without the terminator.
std::string encode_fields(const CardFields& fields);
std::string encode_card(const Card& card);
/// Every card's record followed by the terminator, in corpus order.
std::string encode_corpus(const Corpus& corpus);

struct DecodedCard {
  std::optional<CardFields> fields;
  /// Why the record is malformed; empty when `fields` is present.
  std::string reason;

  bool malformed() const { return !fields.has_value(); }
};

/// Splits a record (terminator optional) on unescaped delimiters and checks
/// the field count, a non-empty name and type line, and that the mana cost
/// parses. Never throws.
DecodedCard decode_card(std::string_view raw);

}  // namespace cardnet
