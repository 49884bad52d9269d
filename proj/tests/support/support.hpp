#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cardnet/card.hpp"
#include "cardnet/dataset.hpp"
#include "cardnet/image.hpp"

namespace cardnet::testing {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "cardnet");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path fixtures_dir();

/// Reference tint per color label (W, U, B, R, G, Colorless).
std::array<std::uint8_t, 3> class_tint(std::size_t label);

/// An image whose dominant hue is the class tint, with per-pixel noise and a
/// few random darker blobs so the classes are not trivially constant.
Image tint_image(std::size_t label, Dims dims, std::mt19937_64& rng);

/// `per_class` images for each of `classes` labels; card ids are unique.
std::vector<ImageSample> tint_dataset(std::size_t per_class, std::size_t classes, Dims dims, std::uint64_t seed);

/// Card-like sentence built from shared templates with one marker keyword of
/// class `label` (0..4) spliced in. Marker keyword sets are disjoint.
std::string keyword_text(std::size_t label, std::mt19937_64& rng);

/// Random card with awkward content: reserved characters in names and rules
/// text, self references, hybrid costs, optional power/toughness.
Card random_card(std::size_t index, std::mt19937_64& rng);

std::vector<double> random_distribution(std::size_t n, std::mt19937_64& rng);

}  // namespace cardnet::testing

#include "cardnet/nn/layers.hpp"

namespace cardnet::testing {

/// Two-class, 4×4-input copy of the image architecture (same layer order and
/// layer types, fewer maps) in double precision, with weights large enough
/// that the ReLUs and poolings are exercised away from their kinks.
nn::Sequential<double> reduced_image_network(std::uint64_t seed);

/// Largest relative error between back-propagated and central-difference
/// gradients of the summed cross-entropy over `inputs`, across `probes`
/// randomly chosen parameter entries (every tensor probed at least once when
/// probes allow). Entries where both gradients are below 1e-9 count as exact.
double gradcheck(nn::Sequential<double>& net, const std::vector<std::vector<double>>& inputs,
                 const std::vector<std::size_t>& labels, std::size_t probes, std::uint64_t seed);

}  // namespace cardnet::testing

#include "cardnet/card_bank.hpp"
#include "cardnet/matcher.hpp"

namespace cardnet::testing {

/// Bank of random, well-formed entries. Roughly `tie_share` of the entries
/// copy the prediction vectors of an earlier entry so that exact score ties occur.
std::vector<BankEntry> random_bank(std::size_t n, double tie_share, std::mt19937_64& rng);

/// Independent scan: lowest w_c·Σ|Δcolor| + w_t·Σ|Δtype|, first index on ties.
/// Returns the bank position, or npos when nothing is eligible.
std::size_t brute_force_match(const MatchQuery& query, const std::vector<BankEntry>& bank);

}  // namespace cardnet::testing
