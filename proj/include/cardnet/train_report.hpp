#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cardnet {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> eval_accuracy;
  double learning_rate = 0.0;
  double wall_seconds = 0.0;
};

/// Per-epoch training log. Serialized as JSON lines: one {"type":"epoch"}
/// object per epoch followed by a single {"type":"summary"} object carrying
/// the final accuracy and the config snapshot.
struct TrainReport {
  std::string kind;
  std::vector<EpochRecord> epochs;
  std::optional<double> final_accuracy;
  double wall_seconds = 0.0;
  nlohmann::json config = nlohmann::json::object();

  std::string to_jsonl() const;
  void write(const std::filesystem::path& path) const;
};

/// Invoked after every completed epoch, e.g. for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

}  // namespace cardnet
