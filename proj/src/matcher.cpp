#include "cardnet/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cardnet/error.hpp"
#include "cardnet/kernels.hpp"
#include "io.hpp"

namespace cardnet {

using nlohmann::json;

PredictionVector normalize(LabelSet set, std::span<const double> raw) {
  if (raw.empty()) throw InputError("cannot normalize an empty score vector");
  if (raw.size() != label_count(set))
    throw InputError("score vector has " + std::to_string(raw.size()) + " entries, the '" +
                     std::string(label_set_name(set)) + "' label set has " + std::to_string(label_count(set)));
  std::vector<double> v(raw.size());
  double sum = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) throw InputError("score vector holds a non-finite value");
    v[i] = std::max(0.0, raw[i]);
    sum += v[i];
  }
  if (sum == 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / double(v.size()));
  } else {
    for (double& x : v) x /= sum;
  }
  return PredictionVector(set, std::move(v));
}

double label_distance(const PredictionVector& a, const PredictionVector& b) {
  if (a.label_set() != b.label_set())
    throw InputError("cannot compare a '" + std::string(label_set_name(a.label_set())) + "' vector with a '" +
                     std::string(label_set_name(b.label_set())) + "' vector");
  return kernels::l1_distance(a.scores(), b.scores());
}

void MatchQuery::validate() const {
  if (color.label_set() != LabelSet::Color) throw InputError("query color vector is not over the color labels");
  if (type.label_set() != LabelSet::Type) throw InputError("query type vector is not over the type labels");
  if (!(w_color >= 0.0) || !(w_type >= 0.0) || !std::isfinite(w_color) || !std::isfinite(w_type))
    throw InputError("match weights must be finite and non-negative");
  if (w_color == 0.0 && w_type == 0.0) throw InputError("match weights must not both be zero");
  if (k == 0) throw InputError("k must be at least 1");
}

json MatchQuery::to_json() const {
  return json{{"color_pred", color.to_json()}, {"type_pred", type.to_json()},
              {"w_color", w_color},            {"w_type", w_type},
              {"k", k},                        {"include_malformed", include_malformed}};
}

std::vector<MatchResult> match(const MatchQuery& query, std::span<const BankEntry> bank) {
  query.validate();
  struct Scored {
    double score, cd, td;
    const BankEntry* entry;
  };
  std::vector<Scored> scored;
  scored.reserve(bank.size());
  for (const auto& e : bank) {
    if (e.malformed && !query.include_malformed) continue;
    const double cd = label_distance(query.color, e.color_pred);
    const double td = label_distance(query.type, e.type_pred);
    scored.push_back({query.w_color * cd + query.w_type * td, cd, td, &e});
  }
  if (scored.empty())
    throw InputError(bank.empty() ? "card bank is empty" : "card bank has no well-formed entries to match");

  const std::size_t k = std::min(query.k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(k), scored.end(),
                    [](const Scored& a, const Scored& b) {
                      if (a.score != b.score) return a.score < b.score;
                      return a.entry->bank_index < b.entry->bank_index;
                    });
  std::vector<MatchResult> out;
  for (std::size_t i = 0; i < k; ++i)
    out.push_back({scored[i].entry->bank_index, scored[i].cd, scored[i].td, scored[i].score, scored[i].entry->raw});
  return out;
}

std::string query_digest(const MatchQuery& query) { return detail::sha256_hex(query.to_json().dump()); }

json match_to_json(const MatchQuery& query, std::span<const MatchResult> results) {
  json arr = json::array();
  for (const auto& r : results)
    arr.push_back(
        {{"bank_index", r.bank_index}, {"C_d", r.color_distance}, {"T_d", r.type_distance}, {"score", r.score},
         {"raw", r.raw}});
  return json{{"query_digest", query_digest(query)}, {"results", arr}};
}

std::string render_card(const BankEntry& entry) {
  std::string out;
  if (entry.decoded) {
    const auto& f = *entry.decoded;
    out += f.name;
    if (!f.mana_cost.empty()) out += "  " + f.mana_cost;
    out += "\n" + f.type_line;
    if (!f.power_toughness.empty()) out += "  (" + f.power_toughness + ")";
    out += "\n";
    if (!f.rules_text.empty()) out += f.rules_text + "\n";
  } else {
    out += "[malformed] " + entry.raw + "\n";
  }
  out += "color: " + std::string(entry.color_pred.argmax_label()) + "  type: " +
         std::string(entry.type_pred.argmax_label()) + "  (bank entry " + std::to_string(entry.bank_index) + ")\n";
  return out;
}

}  // namespace cardnet
