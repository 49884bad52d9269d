#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardnet/dataset.hpp"
#include "cardnet/image.hpp"
#include "cardnet/labels.hpp"
#include "cardnet/nn/artifact.hpp"
#include "cardnet/nn/layers.hpp"
#include "cardnet/prediction.hpp"
#include "cardnet/train_report.hpp"

namespace cardnet {

/// CONV → POOL → NORM → CONV → NORM → POOL → FULLY → SOFTMAX.
struct CNNConfig {
  Dims input{32, 32};
  LabelSet labels = LabelSet::Color;
  std::size_t conv1_maps = 64;
  std::size_t conv2_maps = 64;
  std::size_t kernel = 5;
  std::size_t pool_window = 3;
  std::size_t pool_stride = 2;
  std::size_t lrn_radius = 4;
  double lrn_bias = 1.0;
  double lrn_alpha = 0.001 / 9.0;
  double lrn_beta = 0.75;
  std::size_t fc_width = 192;

  double learning_rate = 0.01;
  double momentum = 0.9;
  double lr_decay = 0.1;
  int plateau_epochs = 3;
  int epochs = 30;
  std::size_t batch_size = 128;
  double conv_init_std = 0.01;
  double fc_init_std = 0.1;
  std::uint64_t seed = 0;

  std::size_t label_count() const { return cardnet::label_count(labels); }
  void validate() const;
  nlohmann::json to_json() const;
  static CNNConfig from_json(const nlohmann::json& j);
};

/// Builds the network with freshly initialized weights (Gaussian, zero biases).
template <class T>
nn::Sequential<T> build_image_network(const CNNConfig& config, std::mt19937_64& rng);

/// Layer kinds in order, with activations omitted.
std::vector<std::string> layer_order(const CNNConfig& config);

/// Pixel bytes → network input in [-1, 1], planar order preserved.
std::vector<float> image_to_input(const Image& image);

class ImageClassifier {
 public:
  explicit ImageClassifier(const CNNConfig& config);
  ImageClassifier(ImageClassifier&&) noexcept;
  ImageClassifier& operator=(ImageClassifier&&) noexcept;
  ~ImageClassifier();

  const CNNConfig& config() const { return config_; }
  LabelSet label_set() const { return config_.labels; }

  /// Throws InputError when the image dimensions differ from the config.
  PredictionVector predict(const Image& image) const;
  std::vector<float> logits(const Image& image) const;

  nn::Artifact to_artifact() const;
  static ImageClassifier from_artifact(const nn::Artifact& artifact);
  void save(const std::filesystem::path& path) const;
  static ImageClassifier load(const std::filesystem::path& path);

  nn::Sequential<float>& network() { return *net_; }

 private:
  CNNConfig config_;
  std::unique_ptr<nn::Sequential<float>> net_;
  std::unique_ptr<std::mutex> mutex_;
};

struct TrainedImageModel {
  ImageClassifier model;
  TrainReport report;
};

/// SGD with momentum; the learning rate is multiplied by lr_decay after
/// plateau_epochs epochs without eval-accuracy improvement. Training samples are
/// put in canonical order before the seeded shuffle, so the result does not
/// depend on the order they are passed in. Throws DivergenceError on a
/// non-finite loss and ConfigError on dimension or label mismatches.
TrainedImageModel train_image(const CNNConfig& config, std::span<const ImageSample> train,
                              std::span<const ImageSample> eval, const EpochCallback& on_epoch = {});

/// Per-card accuracy (see per_card_accuracy). Throws InputError on an empty set.
double evaluate(const ImageClassifier& model, std::span<const ImageSample> eval);

}  // namespace cardnet
