#include "cardnet/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "cardnet/error.hpp"

namespace cardnet {

PredictionVector::PredictionVector(LabelSet set, std::vector<double> scores)
    : set_(set), scores_(std::move(scores)) {
  if (scores_.size() != label_count(set_))
    throw InputError("prediction vector has " + std::to_string(scores_.size()) + " scores, label set '" +
                     std::string(label_set_name(set_)) + "' needs " + std::to_string(label_count(set_)));
  double sum = 0;
  for (double s : scores_) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("prediction score is negative or non-finite");
    sum += s;
  }
  if (std::fabs(sum - 1.0) > kSumTolerance) throw InputError("prediction scores do not sum to 1");
}

template <class T>
PredictionVector PredictionVector::from_logits(LabelSet set, std::span<const T> logits) {
  if (logits.empty()) throw InputError("empty logits");
  double mx = -INFINITY;
  for (T v : logits) mx = std::max(mx, double(v));
  if (!std::isfinite(mx)) throw InputError("non-finite logits");
  std::vector<double> p(logits.size());
  double z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += p[i] = std::exp(double(logits[i]) - mx);
  for (double& v : p) v /= z;
  return PredictionVector(set, std::move(p));
}

template PredictionVector PredictionVector::from_logits<float>(LabelSet, std::span<const float>);
template PredictionVector PredictionVector::from_logits<double>(LabelSet, std::span<const double>);

double PredictionVector::score(std::string_view label) const {
  auto idx = label_index(set_, label);
  if (!idx) throw InputError("unknown label '" + std::string(label) + "'");
  return scores_[*idx];
}

std::size_t PredictionVector::argmax() const {
  return static_cast<std::size_t>(std::max_element(scores_.begin(), scores_.end()) - scores_.begin());
}

std::string_view PredictionVector::argmax_label() const { return label_names(set_)[argmax()]; }

nlohmann::json PredictionVector::to_json() const {
  nlohmann::json obj = nlohmann::json::object();
  auto names = label_names(set_);
  for (std::size_t i = 0; i < scores_.size(); ++i) obj[std::string(names[i])] = scores_[i];
  return obj;
}

PredictionVector PredictionVector::from_json(LabelSet set, const nlohmann::json& obj) {
  if (!obj.is_object()) throw FormatError("prediction vector must be a JSON object");
  auto names = label_names(set);
  if (obj.size() != names.size()) throw FormatError("prediction vector has wrong label count");
  std::vector<double> scores;
  for (auto name : names) {
    auto it = obj.find(std::string(name));
    if (it == obj.end() || !it->is_number())
      throw FormatError("prediction vector is missing label '" + std::string(name) + "'");
    scores.push_back(it->get<double>());
  }
  return PredictionVector(set, std::move(scores));
}

}  // namespace cardnet
