#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardnet/card_bank.hpp"
#include "cardnet/labels.hpp"
#include "cardnet/prediction.hpp"

namespace cardnet {

/// Negative scores are clamped to 0 and the rest divided by their sum; an
/// all-zero vector becomes uniform. Throws InputError when `raw` is empty,
/// has the wrong length for `set`, or holds a non-finite value.
PredictionVector normalize(LabelSet set, std::span<const double> raw);

/// Σ |a_i − b_i| over the shared label set. Throws InputError on a label-set mismatch.
double label_distance(const PredictionVector& a, const PredictionVector& b);

struct MatchQuery {
  PredictionVector color;
  PredictionVector type;
  double w_color = 1.0;
  double w_type = 1.0;
  std::size_t k = 1;
  bool include_malformed = false;

  /// Throws InputError for swapped label sets, negative or all-zero weights, or k = 0.
  void validate() const;
  nlohmann::json to_json() const;
};

struct MatchResult {
  std::size_t bank_index = 0;
  double color_distance = 0.0;  // C_d
  double type_distance = 0.0;   // T_d
  double score = 0.0;           // w_color·C_d + w_type·T_d
  std::string raw;

  bool operator==(const MatchResult&) const = default;
};

/// The k entries with the lowest score, ascending, ties broken by lower
/// bank_index. Malformed entries are skipped unless the query includes them.
/// Throws InputError when no entry is eligible.
std::vector<MatchResult> match(const MatchQuery& query, std::span<const BankEntry> bank);

/// Hex SHA-256 of the query's canonical JSON.
std::string query_digest(const MatchQuery& query);
/// {"query_digest": ..., "results": [{bank_index, C_d, T_d, score, raw}, ...]}
nlohmann::json match_to_json(const MatchQuery& query, std::span<const MatchResult> results);

/// Multi-line human-readable rendering of a bank entry.
std::string render_card(const BankEntry& entry);

}  // namespace cardnet
