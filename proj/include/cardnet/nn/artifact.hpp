#pragma once

// Model artifact container, shared by every model kind.
//
//   "CARDNETM"             8-byte magic
//   u32 version            currently 1
//   u32 len, bytes         kind tag ("image-cnn", "text-cnn", "char-rnn")
//   u32 len, bytes         config snapshot, JSON text
//   u32 tensor count
//   per tensor:
//     u32 len, bytes       name
//     u32 rank, rank × u64 dims
//     prod(dims) × f32     values
//
// All integers and floats little-endian.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardnet/nn/layers.hpp"

namespace cardnet::nn {

inline constexpr std::uint32_t kArtifactVersion = 1;

struct Tensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<float> data;
};

struct Artifact {
  std::string kind;
  nlohmann::json config = nlohmann::json::object();
  std::vector<Tensor> tensors;

  std::vector<std::uint8_t> serialize() const;
  static Artifact deserialize(std::span<const std::uint8_t> bytes, std::string_view name);
  void save(const std::filesystem::path& path) const;
  static Artifact load(const std::filesystem::path& path);
  /// Throws FormatError when the kind tag differs.
  void expect_kind(std::string_view expected) const;

  const Tensor& tensor(std::string_view name) const;

  template <class T>
  void store(std::span<Param<T>* const> params);
  /// Copies tensors into params by name, checking shapes.
  template <class T>
  void restore(std::span<Param<T>* const> params) const;
};

}  // namespace cardnet::nn
