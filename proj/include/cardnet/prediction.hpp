#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cardnet/labels.hpp"

namespace cardnet {

/// Per-label scores over a full label set: every score >= 0 and the scores sum
/// to 1 within 1e-6. Construction validates both.
class PredictionVector {
 public:
  static constexpr double kSumTolerance = 1e-6;

  PredictionVector(LabelSet set, std::vector<double> scores);

  /// Numerically stable softmax of raw logits.
  template <class T>
  static PredictionVector from_logits(LabelSet set, std::span<const T> logits);

  LabelSet label_set() const { return set_; }
  std::size_t size() const { return scores_.size(); }
  std::span<const double> scores() const { return scores_; }
  double operator[](std::size_t i) const { return scores_[i]; }
  double score(std::string_view label) const;
  /// Lowest index among the maxima.
  std::size_t argmax() const;
  std::string_view argmax_label() const;

  /// {"White": 0.27, ...} keyed by label name.
  nlohmann::json to_json() const;
  static PredictionVector from_json(LabelSet set, const nlohmann::json& obj);

  bool operator==(const PredictionVector&) const = default;

 private:
  LabelSet set_;
  std::vector<double> scores_;
};

}  // namespace cardnet
