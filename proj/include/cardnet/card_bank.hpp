#pragma once

// Generated-card bank: JSON lines, one entry per generated record
//
//   {"bank_index":0,"raw":"...","decoded":{...}|null,
//    "color_pred":{"White":..,...},"type_pred":{"Creature":..,...},"malformed":false}
//
// plus a sidecar manifest (<bank>.manifest.json) with the generator seed,
// temperature, count, artifact hashes and the malformed rate.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cardnet/card_encoding.hpp"
#include "cardnet/prediction.hpp"
#include "cardnet/text_classifier.hpp"
#include "cardnet/text_generator.hpp"

namespace cardnet {

struct BankEntry {
  std::size_t bank_index = 0;
  std::string raw;
  std::optional<CardFields> decoded;
  PredictionVector color_pred;
  PredictionVector type_pred;
  bool malformed = false;

  nlohmann::json to_json() const;
  /// Validates both vectors and the malformed flag's consistency with `decoded`.
  static BankEntry from_json(const nlohmann::json& j);
};

struct BankManifest {
  std::uint64_t generator_seed = 0;
  double temperature = 0.0;
  std::size_t count = 0;
  std::string generator_sha256;
  std::string color_model_sha256;
  std::string type_model_sha256;
  std::size_t malformed_count = 0;
  double malformed_rate = 0.0;

  nlohmann::json to_json() const;
  static BankManifest from_json(const nlohmann::json& j);
};

/// Text handed to the classifiers for one generated record: the decoded type
/// line and rules text when the record is well formed, the raw record otherwise.
std::string bank_classifier_text(const DecodedCard& decoded, std::string_view raw);

/// Decodes and classifies `records`, numbering them from 0. Throws ConfigError
/// when the classifiers do not carry the color and type label sets respectively.
std::vector<BankEntry> classify_records(std::span<const std::string> records, const TextClassifier& color_model,
                                        const TextClassifier& type_model);

struct Bank {
  std::vector<BankEntry> entries;
  BankManifest manifest;
};

/// Samples `count` records and classifies them. Hash fields are left empty.
Bank build_card_bank(const TextGenerator& generator, std::size_t count, double temperature, std::uint64_t seed,
                     const TextClassifier& color_model, const TextClassifier& type_model);

/// File-level variant: loads the three artifacts, records their hashes, and
/// writes the bank and its manifest. Output is byte-identical for fixed inputs.
BankManifest build_card_bank(const std::filesystem::path& generator_path, const std::filesystem::path& color_path,
                             const std::filesystem::path& type_path, std::size_t count, double temperature,
                             std::uint64_t seed, const std::filesystem::path& out);

std::filesystem::path bank_manifest_path(const std::filesystem::path& bank);
void write_bank(const std::filesystem::path& path, const Bank& bank);
/// Throws FormatError on malformed lines or a non-contiguous bank_index sequence.
std::vector<BankEntry> load_bank(const std::filesystem::path& path);

}  // namespace cardnet
