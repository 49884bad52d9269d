#include "cardnet/card_encoding.hpp"

#include "cardnet/error.hpp"
#include "cardnet/text.hpp"

namespace cardnet {

namespace {

void append_escaped(std::string& out, std::string_view field) {
  for (char c : field) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case kFieldDelimiter: out += "\\|"; break;
      case kRecordTerminator: out += "\\n"; break;
      default: out += c;
    }
  }
}

}  // namespace

CardFields card_fields(const Card& card) {
  CardFields f;
  f.name = card.name;
  f.mana_cost = card.mana_cost_raw;
  f.type_line = card.type_line;
  if (card.power_toughness) f.power_toughness = card.power_toughness->first + "/" + card.power_toughness->second;
  f.rules_text = mask_name(card.rules_text, card.name);
  return f;
}

std::string encode_fields(const CardFields& fields) {
  std::string out;
  const std::string_view parts[] = {fields.name, fields.mana_cost, fields.type_line, fields.power_toughness,
                                    fields.rules_text};
  for (std::size_t i = 0; i < kEncodedFieldCount; ++i) {
    if (i) out += kFieldDelimiter;
    append_escaped(out, parts[i]);
  }
  return out;
}

std::string encode_card(const Card& card) { return encode_fields(card_fields(card)); }

std::string encode_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& card : corpus.cards) {
    out += encode_card(card);
    out += kRecordTerminator;
  }
  return out;
}

namespace {

// Character-level sampling can stop or go astray in the middle of a multibyte sequence.
bool valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || (len == 2 && c < 0xC2) || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    i += len;
  }
  return true;
}

}  // namespace

DecodedCard decode_card(std::string_view raw) {
  if (!raw.empty() && raw.back() == kRecordTerminator) raw.remove_suffix(1);
  if (!valid_utf8(raw)) return {std::nullopt, "invalid UTF-8"};
  std::vector<std::string> parts(1);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == kRecordTerminator) return {std::nullopt, "unescaped terminator inside record"};
    if (c == kFieldDelimiter) {
      parts.emplace_back();
    } else if (c == '\\') {
      if (++i == raw.size()) return {std::nullopt, "dangling escape at end of record"};
      switch (raw[i]) {
        case '\\': parts.back() += '\\'; break;
        case '|': parts.back() += kFieldDelimiter; break;
        case 'n': parts.back() += kRecordTerminator; break;
        default: return {std::nullopt, "unknown escape '\\" + std::string(1, raw[i]) + "'"};
      }
    } else {
      parts.back() += c;
    }
  }
  if (parts.size() != kEncodedFieldCount)
    return {std::nullopt, "expected " + std::to_string(kEncodedFieldCount) + " fields, found " +
                              std::to_string(parts.size())};
  CardFields f{parts[0], parts[1], parts[2], parts[3], parts[4]};
  if (f.name.empty()) return {std::nullopt, "empty name"};
  if (f.type_line.empty()) return {std::nullopt, "empty type line"};
  try {
    parse_mana_cost(f.mana_cost);
  } catch (const ParseError& e) {
    return {std::nullopt, std::string("mana cost: ") + e.what()};
  }
  return {std::move(f), {}};
}

}  // namespace cardnet
