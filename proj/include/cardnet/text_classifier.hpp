#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardnet/dataset.hpp"
#include "cardnet/labels.hpp"
#include "cardnet/nn/artifact.hpp"
#include "cardnet/nn/layers.hpp"
#include "cardnet/prediction.hpp"
#include "cardnet/text.hpp"
#include "cardnet/train_report.hpp"

namespace cardnet {

struct TextCNNConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 128;
  std::vector<std::size_t> filter_widths{3, 4, 5};
  std::size_t filters_per_width = 100;
  std::size_t max_len = 128;
  LabelSet labels = LabelSet::Color;
  double dropout = 0.5;
  double learning_rate = 1e-3;
  int epochs = 10;
  std::size_t batch_size = 50;
  double embedding_init = 0.25;
  double fc_init_std = 0.1;
  std::uint64_t seed = 0;

  std::size_t label_count() const { return cardnet::label_count(labels); }
  std::size_t feature_count() const { return filter_widths.size() * filters_per_width; }
  void validate() const;
  nlohmann::json to_json() const;
  static TextCNNConfig from_json(const nlohmann::json& j);
};

/// Embedding → parallel 1-D convolutions (one per filter width) → ReLU →
/// max over time → dropout → softmax layer. One token sequence per call, with
/// gradients accumulated until the optimizer step.
template <class T>
class TextCnn {
 public:
  TextCnn(const TextCNNConfig& config, std::mt19937_64& rng);

  /// `tokens` must hold exactly max_len ids below vocab_size.
  std::span<const T> forward(std::span<const std::int32_t> tokens, bool training);
  void backward(std::span<const T> dlogits);
  std::vector<nn::Param<T>*> params();

  nn::Param<T>& embedding() { return embedding_; }

 private:
  struct Branch {
    std::size_t width;
    nn::Param<T> weight, bias;  // filters × (width · dim)
    std::vector<T> response;    // positions × filters
    std::vector<std::size_t> argmax;
  };

  TextCNNConfig config_;
  nn::Param<T> embedding_;
  std::vector<Branch> branches_;
  nn::Dropout<T> dropout_;
  nn::Dense<T> head_;
  std::vector<std::int32_t> tokens_;
  std::vector<T> embedded_, features_, dropped_, logits_;
  std::vector<T> dfeatures_, ddropped_, dembedded_;
};

class TextClassifier {
 public:
  TextClassifier(const TextCNNConfig& config, Vocabulary vocab);
  TextClassifier(TextClassifier&&) noexcept;
  TextClassifier& operator=(TextClassifier&&) noexcept;
  ~TextClassifier();

  const TextCNNConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  LabelSet label_set() const { return config_.labels; }

  PredictionVector predict_ids(std::span<const std::int32_t> tokens) const;
  /// Tokenizes and encodes `text` with the model's vocabulary. Any string is accepted.
  PredictionVector predict_text(std::string_view text) const;

  nn::Artifact to_artifact() const;
  static TextClassifier from_artifact(const nn::Artifact& artifact);
  void save(const std::filesystem::path& path) const;
  static TextClassifier load(const std::filesystem::path& path);

  TextCnn<float>& network() { return *net_; }

 private:
  TextCNNConfig config_;
  Vocabulary vocab_;
  std::unique_ptr<TextCnn<float>> net_;
  std::unique_ptr<std::mutex> mutex_;
};

struct TrainedTextModel {
  TextClassifier model;
  TrainReport report;
};

/// Adam on per-sample cross-entropy. Throws InputError on an empty training
/// set, ConfigError when samples or config disagree with the vocabulary, and
/// DivergenceError on a non-finite loss.
TrainedTextModel train_text(const TextCNNConfig& config, const Vocabulary& vocab, std::span<const TextSample> train,
                            std::span<const TextSample> eval, const EpochCallback& on_epoch = {});

double evaluate(const TextClassifier& model, std::span<const TextSample> eval);

}  // namespace cardnet
