#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cardnet {

struct Dims {
  int height = 32;
  int width = 32;
  bool operator==(const Dims&) const = default;
};

/// 8-bit RGB image, channel-planar (all R, then G, then B), row-major in each plane.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int h, int w) : height(h), width(w), pixels(std::size_t(3) * h * w) {}

  Dims dims() const { return {height, width}; }
  std::size_t plane() const { return std::size_t(height) * width; }
  std::uint8_t& at(int c, int y, int x) { return pixels[c * plane() + std::size_t(y) * width + x]; }
  std::uint8_t at(int c, int y, int x) const { return pixels[c * plane() + std::size_t(y) * width + x]; }

  bool operator==(const Image&) const = default;
};

/// Decodes JPEG, PNG or binary PPM (P6). Throws DecodeError.
Image decode_image(std::span<const std::uint8_t> bytes);
Image load_image(const std::filesystem::path& path);

/// Center-crops to the target aspect ratio, then scales to exactly target.
/// Downscaling uses area averaging, upscaling bilinear interpolation.
Image decode_and_resize(std::span<const std::uint8_t> bytes, Dims target);
Image fit_to(const Image& src, Dims target);

/// Area-average when shrinking in both axes, bilinear otherwise. Identity when sizes match.
Image resize(const Image& src, Dims target);
Image crop(const Image& src, int top, int left, int height, int width);

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality = 95);
std::vector<std::uint8_t> encode_ppm(const Image& img);

struct AugmentConfig {
  /// Total crop margin: a (H - margin) × (W - margin) window is cut out and scaled back.
  int crop_margin = 8;
  /// Maximum shift in pixels along each axis; vacated pixels replicate the edge.
  int max_displacement = 4;

  /// Throws ConfigError when 2·margin >= min(H, W) or a value is negative.
  void validate(Dims dims) const;
};

/// Random crop-and-displace distortion. Same seed gives the same output.
Image augment(const Image& src, std::uint64_t seed, const AugmentConfig& config);

}  // namespace cardnet
