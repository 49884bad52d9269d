#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cardnet/card.hpp"

namespace cardnet {

/// Lowercased words split on whitespace and punctuation. A brace-delimited
/// group such as "{3G}" or "{this card}" is kept verbatim as one token.
/// Word characters: ASCII alphanumerics, '+', '-', '/', '\'' and non-ASCII bytes.
std::vector<std::string> tokenize(std::string_view text);

/// Self-reference placeholder used in encoded and generated card text.
inline constexpr std::string_view kSelfReference = "{this card}";

/// Replaces every occurrence of `name` in `rules_text` with the self-reference token.
std::string mask_name(std::string_view rules_text, std::string_view name);

/// Classifier input: type line followed by rules text with the name masked.
std::string classifier_text(std::string_view name, std::string_view type_line, std::string_view rules_text);
std::string classifier_text(const Card& card);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  /// `tokens` excludes the two sentinels.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::int32_t id(std::string_view token) const;
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  /// Full list including sentinels at 0 and 1.
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// One token per line; line number is the index.
  std::string to_text() const;
  static Vocabulary from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Tokens with count >= min_count, ordered by descending count then lexicographically.
Vocabulary build_text_vocab(std::span<const std::string> texts, std::size_t min_count);

/// Exactly max_len ids: truncated, or right-padded with kPad. OOV maps to kUnk.
std::vector<std::int32_t> encode_text(std::string_view text, const Vocabulary& vocab, std::size_t max_len);

}  // namespace cardnet
