#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace cardnet {

/// Endpoint-agnostic fetch settings. Templates are full URLs in which "{id}"
/// is replaced by the card id, e.g. "https://mirror.example/cards/{id}".
struct FetchConfig {
  std::string record_url;
  /// Optional; when empty no images are downloaded.
  std::string image_url;
  /// Requests per second, across records and images.
  double rate_limit = 5.0;
  int timeout_seconds = 30;

  void validate() const;
};

struct FetchError {
  std::string id;
  std::string message;
  bool operator==(const FetchError&) const = default;
};

struct FetchReport {
  std::size_t requested = 0;
  std::size_t downloaded = 0;
  /// Ids already present in the output directory.
  std::size_t skipped = 0;
  /// HTTP-level failures; the run continues past them.
  std::vector<FetchError> errors;
  /// Index into the id list where a transport failure stopped the run.
  std::optional<std::size_t> resume_cursor;

  bool complete() const { return !resume_cursor.has_value(); }
  nlohmann::json to_json() const;
};

/// Downloads <out>/records/<id>.json and, if configured, <out>/images/<id>.jpg
/// for each id, sleeping as needed to respect the rate limit. Ids whose files
/// already exist are skipped, so an interrupted run resumes by rerunning it.
/// The report is also written to <out>/fetch_report.json.
FetchReport fetch_card_data(std::span<const std::string> ids, const FetchConfig& config,
                            const std::filesystem::path& out);

/// File-system-safe form of a card id.
std::string fetch_file_stem(std::string_view id);

}  // namespace cardnet
