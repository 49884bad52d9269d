#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardnet/card.hpp"
#include "cardnet/image.hpp"
#include "cardnet/labels.hpp"

namespace cardnet {

struct ImageSample {
  Image image;
  std::uint16_t label_id = 0;
  std::string card_id;
  bool operator==(const ImageSample&) const = default;
};

struct TextSample {
  std::vector<std::int32_t> token_ids;
  std::uint16_t label_id = 0;
  std::string card_id;
  bool operator==(const TextSample&) const = default;
};

struct LabeledCard {
  std::string card_id;
  std::uint16_t label_id = 0;
  bool operator==(const LabeledCard&) const = default;
};

/// Label ids of one card. Color: identity colors, or {Colorless} when empty.
/// Type: merged type labels (possibly empty).
std::vector<std::uint16_t> card_labels(const Card& card, LabelSet labeling);

/// One entry per (card, label). Cards with an empty type set are dropped for
/// type labeling; multicolored cards never get a Colorless entry.
std::vector<LabeledCard> expand_multilabel(const Corpus& corpus, LabelSet labeling);

struct SplitSpec {
  double train_fraction = 5.0 / 6.0;
  std::uint64_t seed = 0;

  /// Accepts "0.8" or "5/6".
  static double parse_fraction(std::string_view text);
  void validate() const;
};

/// Card-coherent partition: returns, per sample, whether it goes to training.
/// Cards are visited in seeded random order and assigned to training while the
/// training count stays within round(fraction · N).
std::vector<bool> split_mask(std::span<const std::string> card_ids, const SplitSpec& spec);

template <class Sample>
std::pair<std::vector<Sample>, std::vector<Sample>> split(std::vector<Sample> samples, const SplitSpec& spec) {
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.card_id);
  auto mask = split_mask(ids, spec);
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    (mask[i] ? out.first : out.second).push_back(std::move(samples[i]));
  return out;
}

/// Accuracy over cards: a card counts as correct when the prediction of its
/// first sample is in the union of labels carried by its samples.
double per_card_accuracy(std::span<const std::size_t> predicted, std::span<const std::string> card_ids,
                         std::span<const std::uint16_t> labels);

// ---------------------------------------------------------------------------
// Binary batch files
//
//   "MTGBATCH" | u32 N | u32 H | u32 W | N × (u16 label | R plane | G plane | B plane)
//
// All integers little-endian. A BatchSet directory holds data_batch_<i>.bin
// files, manifest.json and cards.txt (one card id per record, in order).

inline constexpr char kBatchMagic[8] = {'M', 'T', 'G', 'B', 'A', 'T', 'C', 'H'};

struct BatchManifest {
  std::string label_set;
  int height = 32;
  int width = 32;
  std::vector<std::size_t> records_per_batch;
  std::uint64_t seed = 0;
  nlohmann::json augmentation = nlohmann::json::object();

  std::size_t total_records() const;
  nlohmann::json to_json() const;
  static BatchManifest from_json(const nlohmann::json& j);
};

struct BatchSet {
  std::filesystem::path dir;
  BatchManifest manifest;
  std::vector<std::filesystem::path> files;
};

std::vector<std::uint8_t> encode_batch(std::span<const ImageSample> samples, Dims dims);
/// `name` is used in error messages only.
std::vector<ImageSample> decode_batch(std::span<const std::uint8_t> bytes, std::string_view name);

/// `manifest.records_per_batch` is recomputed from `max_records`.
BatchSet write_batches(std::span<const ImageSample> samples, BatchManifest manifest,
                       const std::filesystem::path& dir, std::size_t max_records = 10000);
BatchSet open_batches(const std::filesystem::path& dir);
std::vector<ImageSample> read_batches(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Text datasets: one JSON object per line {card_id, label_id, tokens}.

void write_text_samples(const std::filesystem::path& path, std::span<const TextSample> samples);
std::vector<TextSample> read_text_samples(const std::filesystem::path& path);

}  // namespace cardnet
