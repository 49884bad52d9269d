#include "cardnet/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "cardnet/error.hpp"
#include "io.hpp"

namespace cardnet {

using nlohmann::json;

void FetchConfig::validate() const {
  if (record_url.find("{id}") == std::string::npos) throw ConfigError("record URL template must contain {id}");
  if (!image_url.empty() && image_url.find("{id}") == std::string::npos)
    throw ConfigError("image URL template must contain {id}");
  if (!(rate_limit > 0.0)) throw ConfigError("rate limit must be positive");
  if (timeout_seconds <= 0) throw ConfigError("timeout must be positive");
}

json FetchReport::to_json() const {
  json errs = json::array();
  for (const auto& e : errors) errs.push_back({{"id", e.id}, {"error", e.message}});
  return json{{"requested", requested},
              {"downloaded", downloaded},
              {"skipped", skipped},
              {"errors", errs},
              {"resume_cursor", resume_cursor ? json(*resume_cursor) : json(nullptr)}};
}

std::string fetch_file_stem(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.';
    out += safe ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

namespace {

std::string url_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += char(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

std::string expand(const std::string& tmpl, std::string_view id) {
  std::string out = tmpl;
  const auto enc = url_encode(id);
  for (auto pos = out.find("{id}"); pos != std::string::npos; pos = out.find("{id}", pos + enc.size()))
    out.replace(pos, 4, enc);
  return out;
}

// Splits "scheme://host[:port]/path?query" into origin and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("URL lacks a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

struct TransportFailure {
  std::string message;
};

class Limiter {
 public:
  explicit Limiter(double per_second) : interval_(1.0 / per_second) {}
  void wait() {
    const auto now = std::chrono::steady_clock::now();
    if (next_ > now) std::this_thread::sleep_until(next_);
    next_ = std::max(now, next_) + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                       std::chrono::duration<double>(interval_));
  }

 private:
  double interval_;
  std::chrono::steady_clock::time_point next_{};
};

// Returns the body on HTTP 200, nullopt with `error` set on other statuses;
// throws TransportFailure when no response arrives.
std::optional<std::string> get(const std::string& url, int timeout, std::string& error) {
  auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_follow_location(true);
  auto res = client.Get(path);
  if (!res) throw TransportFailure{httplib::to_string(res.error()) + " (" + url + ")"};
  if (res->status != 200) {
    error = "HTTP " + std::to_string(res->status) + " for " + url;
    return std::nullopt;
  }
  return res->body;
}

}  // namespace

FetchReport fetch_card_data(std::span<const std::string> ids, const FetchConfig& config,
                            const std::filesystem::path& out) {
  config.validate();
  FetchReport report;
  report.requested = ids.size();
  const auto records = out / "records", images = out / "images";
  std::filesystem::create_directories(records);
  if (!config.image_url.empty()) std::filesystem::create_directories(images);

  Limiter limiter(config.rate_limit);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto stem = fetch_file_stem(ids[i]);
    const auto record_path = records / (stem + ".json");
    const auto image_path = images / (stem + ".jpg");
    const bool need_record = !std::filesystem::exists(record_path);
    const bool need_image = !config.image_url.empty() && !std::filesystem::exists(image_path);
    if (!need_record && !need_image) {
      ++report.skipped;
      continue;
    }
    try {
      std::string error;
      bool ok = true;
      if (need_record) {
        limiter.wait();
        if (auto body = get(expand(config.record_url, ids[i]), config.timeout_seconds, error))
          detail::write_text(record_path, *body);
        else
          ok = false;
      }
      if (ok && need_image) {
        limiter.wait();
        if (auto body = get(expand(config.image_url, ids[i]), config.timeout_seconds, error))
          detail::write_text(image_path, *body);
        else
          ok = false;
      }
      if (ok)
        ++report.downloaded;
      else
        report.errors.push_back({ids[i], error});
    } catch (const TransportFailure& f) {
      report.errors.push_back({ids[i], f.message});
      report.resume_cursor = i;
      break;
    }
  }
  detail::write_text(out / "fetch_report.json", report.to_json().dump(2) + "\n");
  return report;
}

}  // namespace cardnet
