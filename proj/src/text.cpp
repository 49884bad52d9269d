#include "cardnet/text.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "cardnet/error.hpp"
#include "io.hpp"

namespace cardnet {
namespace {

bool word_char(unsigned char c) {
  return std::isalnum(c) || c == '+' || c == '-' || c == '/' || c == '\'' || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == '{') {
      auto close = text.find('}', i + 1);
      auto reopen = text.find('{', i + 1);
      if (close != std::string_view::npos && (reopen == std::string_view::npos || close < reopen)) {
        out.emplace_back(text.substr(i, close - i + 1));
        i = close + 1;
        continue;
      }
      ++i;
      continue;
    }
    if (!word_char(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string word;
    while (j < text.size() && word_char(static_cast<unsigned char>(text[j]))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[j]))));
      ++j;
    }
    out.push_back(std::move(word));
    i = j;
  }
  return out;
}

std::string mask_name(std::string_view rules_text, std::string_view name) {
  if (name.empty()) return std::string(rules_text);
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto hit = rules_text.find(name, pos);
    if (hit == std::string_view::npos) break;
    out.append(rules_text.substr(pos, hit - pos));
    out.append(kSelfReference);
    pos = hit + name.size();
  }
  out.append(rules_text.substr(pos));
  return out;
}

std::string classifier_text(std::string_view name, std::string_view type_line, std::string_view rules_text) {
  std::string out(type_line);
  out += '\n';
  out += mask_name(rules_text, name);
  return out;
}

std::string classifier_text(const Card& card) { return classifier_text(card.name, card.type_line, card.rules_text); }

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens_.reserve(tokens.size() + 2);
  tokens_.emplace_back(kPadToken);
  tokens_.emplace_back(kUnkToken);
  for (auto& t : tokens) {
    if (t.empty() || t.find('\n') != std::string::npos) throw InputError("vocabulary token is empty or has a newline");
    tokens_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second)
      throw InputError("duplicate vocabulary token '" + tokens_[i] + "'");
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() || it->second == kPad ? kUnk : it->second;
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const auto& t : tokens_) out += t + "\n";
  return out;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (lines.size() < 2 || lines[0] != kPadToken || lines[1] != kUnkToken)
    throw FormatError("vocabulary must start with the <pad> and <unk> sentinels");
  return Vocabulary(std::vector<std::string>(lines.begin() + 2, lines.end()));
}

void Vocabulary::save(const std::filesystem::path& path) const { detail::write_text(path, to_text()); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) { return from_text(detail::read_text(path)); }

Vocabulary build_text_vocab(std::span<const std::string> texts, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts)
    for (auto& tok : tokenize(t)) ++counts[std::move(tok)];
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [tok, n] : counts)
    if (n >= std::max<std::size_t>(min_count, 1) && tok != Vocabulary::kPadToken && tok != Vocabulary::kUnkToken)
      entries.emplace_back(tok, n);
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  for (auto& e : entries) tokens.push_back(std::move(e.first));
  return Vocabulary(std::move(tokens));
}

std::vector<std::int32_t> encode_text(std::string_view text, const Vocabulary& vocab, std::size_t max_len) {
  std::vector<std::int32_t> ids(max_len, Vocabulary::kPad);
  std::size_t i = 0;
  for (const auto& tok : tokenize(text)) {
    if (i == max_len) break;
    ids[i++] = vocab.id(tok);
  }
  return ids;
}

}  // namespace cardnet
