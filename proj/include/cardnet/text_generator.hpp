#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardnet/nn/artifact.hpp"
#include "cardnet/nn/layers.hpp"
#include "cardnet/train_report.hpp"

namespace cardnet {

struct GeneratorConfig {
  std::size_t hidden_size = 256;
  std::size_t layers = 2;
  std::size_t sequence_length = 200;
  /// Number of parallel streams the training text is cut into.
  std::size_t batch_size = 16;
  double learning_rate = 2e-3;
  int epochs = 20;
  double grad_clip = 5.0;
  double init_range = 0.08;
  double temperature = 0.8;
  /// Sampling cuts a record that grows past this many characters.
  std::size_t max_record_chars = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
};

/// Stacked LSTM over one-hot characters with a softmax output layer. Gate
/// order in the weight matrices is input, forget, cell, output.
template <class T>
class CharLstm {
 public:
  struct State {
    std::size_t batch = 0;
    std::vector<std::vector<T>> h, c;  // per layer, batch × hidden
  };

  CharLstm(std::size_t vocab, std::size_t hidden, std::size_t layers, double init_range, std::mt19937_64& rng);

  std::size_t vocab() const { return vocab_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t layers() const { return layers_; }
  State zero_state(std::size_t batch) const;

  /// Forward and backward over a time-major chunk: element t·batch + b is
  /// stream b at step t. Returns the summed cross-entropy in nats, accumulates
  /// parameter gradients scaled by `grad_scale`, and advances `state`.
  double train_chunk(std::span<const std::int32_t> inputs, std::span<const std::int32_t> targets, State& state,
                     double grad_scale);

  /// One inference step for each stream in `state`; returns batch × vocab logits.
  std::span<const T> step(std::span<const std::int32_t> inputs, State& state);

  std::vector<nn::Param<T>*> params();

 private:
  struct LayerParams {
    nn::Param<T> wx, wh, b;  // in × 4H, H × 4H, 4H
  };
  void cell_forward(std::size_t l, const std::int32_t* chars, const T* x, const T* h_prev, const T* c_prev, T* gates,
                    T* c, T* tanh_c, T* h, std::size_t batch);

  std::size_t vocab_, hidden_, layers_;
  std::vector<LayerParams> lp_;
  nn::Param<T> wy_, by_;
  std::vector<T> scratch_, logits_;
};

/// Trained generator: network plus the character alphabet it was trained on.
class TextGenerator {
 public:
  TextGenerator(const GeneratorConfig& config, std::string alphabet);
  TextGenerator(TextGenerator&&) noexcept;
  TextGenerator& operator=(TextGenerator&&) noexcept;
  ~TextGenerator();

  const GeneratorConfig& config() const { return config_; }
  /// Sorted distinct bytes; index = network symbol id.
  const std::string& alphabet() const { return alphabet_; }
  std::vector<std::int32_t> encode(std::string_view text) const;

  /// Exactly `count` records, each split on the terminator (not included).
  /// Sampling starts from a zero state primed with the terminator and is
  /// deterministic in (weights, count, temperature, seed).
  std::vector<std::string> sample(std::size_t count, double temperature, std::uint64_t seed) const;

  nn::Artifact to_artifact() const;
  static TextGenerator from_artifact(const nn::Artifact& artifact);
  void save(const std::filesystem::path& path) const;
  static TextGenerator load(const std::filesystem::path& path);

  CharLstm<float>& network() { return *net_; }

 private:
  GeneratorConfig config_;
  std::string alphabet_;
  std::unique_ptr<CharLstm<float>> net_;
  std::unique_ptr<std::mutex> mutex_;
};

struct TrainedGenerator {
  TextGenerator model;
  TrainReport report;
};

/// Truncated back-propagation through time over `stream`. A terminator is
/// prepended when the stream does not start with one so that a primed sampler
/// sees the same context as the first record did in training. Throws
/// InputError on an empty stream and DivergenceError on a non-finite loss.
TrainedGenerator train_generator(const GeneratorConfig& config, std::string_view stream,
                                 const EpochCallback& on_epoch = {});

}  // namespace cardnet
