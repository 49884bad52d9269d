#pragma once

// Dataset assembly used by the command-line pipeline: corpus + images →
// labeled, split, augmented image samples; corpus → encoded text samples.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cardnet/card.hpp"
#include "cardnet/dataset.hpp"
#include "cardnet/image.hpp"
#include "cardnet/text.hpp"

namespace cardnet {

/// Looks for a card's image: `image_ref` relative to `images_dir` when it names
/// an existing file, else <images_dir>/<id stem>.{jpg,jpeg,png,ppm}.
std::optional<std::filesystem::path> find_card_image(const Card& card, const std::filesystem::path& images_dir);

struct ImageDatasetOptions {
  LabelSet labels = LabelSet::Color;
  Dims dims{32, 32};
  SplitSpec split;
  AugmentConfig augment;
  /// Augmented copies added to the training side, as a fraction of its size.
  double augment_ratio = 0.2;
  std::uint64_t seed = 0;
};

struct ImageDataset {
  std::vector<ImageSample> train;
  std::vector<ImageSample> eval;
  std::size_t augmented = 0;
  /// Ids of cards skipped because no image file was found.
  std::vector<std::string> missing_images;
};

/// Decodes each card image once, expands labels, splits by card and appends
/// augmented training copies. Throws DecodeError naming the card when an image
/// cannot be decoded.
ImageDataset build_image_dataset(const Corpus& corpus, const std::filesystem::path& images_dir,
                                 const ImageDatasetOptions& options);

/// Appends round(ratio · |train|) augmented copies of seeded random training
/// samples. Returns the number of copies.
std::size_t add_augmented(std::vector<ImageSample>& train, const AugmentConfig& config, double ratio,
                          std::uint64_t seed);

struct TextDatasetOptions {
  LabelSet labels = LabelSet::Color;
  std::size_t max_len = 128;
  std::size_t min_count = 1;
  SplitSpec split;
};

struct TextDataset {
  Vocabulary vocab;
  std::vector<TextSample> train;
  std::vector<TextSample> eval;
};

/// The vocabulary is built from the training side only.
TextDataset build_text_dataset(const Corpus& corpus, const TextDatasetOptions& options);

}  // namespace cardnet
