#include "cardnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cardnet/error.hpp"
#include "io.hpp"

namespace cardnet {

using nlohmann::json;

std::vector<std::uint16_t> card_labels(const Card& card, LabelSet labeling) {
  std::vector<std::uint16_t> out;
  if (labeling == LabelSet::Color) {
    for (auto l : card.color_identity.labels()) out.push_back(static_cast<std::uint16_t>(l));
  } else {
    for (auto l : card.types.labels()) out.push_back(static_cast<std::uint16_t>(l));
  }
  return out;
}

std::vector<LabeledCard> expand_multilabel(const Corpus& corpus, LabelSet labeling) {
  std::vector<LabeledCard> out;
  for (const auto& card : corpus.cards)
    for (auto label : card_labels(card, labeling)) out.push_back({card.id, label});
  return out;
}

double SplitSpec::parse_fraction(std::string_view text) {
  auto parse_num = [&](std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw ConfigError("invalid fraction '" + std::string(text) + "'");
    return v;
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_num(text);
  double den = parse_num(text.substr(slash + 1));
  if (den == 0) throw ConfigError("invalid fraction '" + std::string(text) + "'");
  return parse_num(text.substr(0, slash)) / den;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1");
}

std::vector<bool> split_mask(std::span<const std::string> card_ids, const SplitSpec& spec) {
  spec.validate();
  if (card_ids.empty()) throw InputError("cannot split an empty sample list");

  std::vector<std::string_view> order;
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& id : card_ids)
    if (counts[id]++ == 0) order.push_back(id);

  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto target = static_cast<std::size_t>(std::llround(spec.train_fraction * double(card_ids.size())));
  std::unordered_map<std::string_view, bool> in_train;
  std::size_t train = 0;
  for (auto id : order) {
    const std::size_t k = counts[id];
    const bool take = train + k <= target;
    in_train[id] = take;
    if (take) train += k;
  }
  std::vector<bool> mask(card_ids.size());
  for (std::size_t i = 0; i < card_ids.size(); ++i) mask[i] = in_train[card_ids[i]];
  return mask;
}

double per_card_accuracy(std::span<const std::size_t> predicted, std::span<const std::string> card_ids,
                         std::span<const std::uint16_t> labels) {
  if (predicted.size() != card_ids.size() || labels.size() != card_ids.size())
    throw InputError("prediction, card id and label lists differ in length");
  if (card_ids.empty()) throw InputError("cannot evaluate on an empty set");

  struct Entry {
    std::size_t prediction;
    std::set<std::uint16_t> truth;
  };
  std::vector<Entry> cards;
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < card_ids.size(); ++i) {
    auto [it, fresh] = index.try_emplace(card_ids[i], cards.size());
    if (fresh) cards.push_back({predicted[i], {}});
    cards[it->second].truth.insert(labels[i]);
  }
  std::size_t correct = 0;
  for (const auto& c : cards)
    if (c.truth.count(static_cast<std::uint16_t>(c.prediction))) ++correct;
  return double(correct) / double(cards.size());
}

// ---------------------------------------------------------------------------

std::size_t BatchManifest::total_records() const {
  std::size_t n = 0;
  for (auto r : records_per_batch) n += r;
  return n;
}

json BatchManifest::to_json() const {
  return json{{"label_set", label_set}, {"height", height},     {"width", width},
              {"records_per_batch", records_per_batch},          {"seed", seed},
              {"augmentation", augmentation}};
}

BatchManifest BatchManifest::from_json(const json& j) {
  try {
    BatchManifest m;
    m.label_set = j.at("label_set").get<std::string>();
    m.height = j.at("height").get<int>();
    m.width = j.at("width").get<int>();
    m.records_per_batch = j.at("records_per_batch").get<std::vector<std::size_t>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.augmentation = j.value("augmentation", json::object());
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("batch manifest: ") + e.what());
  }
}

std::vector<std::uint8_t> encode_batch(std::span<const ImageSample> samples, Dims dims) {
  const std::size_t record_pixels = std::size_t(3) * dims.height * dims.width;
  std::vector<std::uint8_t> out(kBatchMagic, kBatchMagic + 8);
  out.reserve(20 + samples.size() * (2 + record_pixels));
  detail::put_u32(out, static_cast<std::uint32_t>(samples.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(dims.height));
  detail::put_u32(out, static_cast<std::uint32_t>(dims.width));
  for (const auto& s : samples) {
    if (s.image.dims() != dims) throw InputError("sample '" + s.card_id + "' has mismatched dimensions");
    detail::put_u16(out, s.label_id);
    out.insert(out.end(), s.image.pixels.begin(), s.image.pixels.end());
  }
  return out;
}

std::vector<ImageSample> decode_batch(std::span<const std::uint8_t> bytes, std::string_view name) {
  auto fail = [&](const std::string& why) { return FormatError(std::string(name) + ": " + why); };
  if (bytes.size() < 20) throw fail("truncated header");
  if (!std::equal(kBatchMagic, kBatchMagic + 8, bytes.begin())) throw fail("bad magic");
  const std::uint32_t n = detail::get_u32(&bytes[8]);
  const std::uint32_t h = detail::get_u32(&bytes[12]);
  const std::uint32_t w = detail::get_u32(&bytes[16]);
  if (h == 0 || w == 0 || h > 16384 || w > 16384) throw fail("invalid dimensions");
  const std::size_t record = 2 + std::size_t(3) * h * w;
  const std::size_t expected = 20 + std::size_t(n) * record;
  if (bytes.size() < expected) throw fail("truncated: header declares " + std::to_string(n) + " records");
  if (bytes.size() > expected) throw fail("record count mismatch: trailing bytes after " + std::to_string(n) + " records");

  std::vector<ImageSample> out(n);
  const std::uint8_t* p = bytes.data() + 20;
  for (auto& s : out) {
    s.label_id = detail::get_u16(p);
    s.image = Image(static_cast<int>(h), static_cast<int>(w));
    std::copy_n(p + 2, record - 2, s.image.pixels.begin());
    p += record;
  }
  return out;
}

namespace {

std::filesystem::path batch_file(const std::filesystem::path& dir, std::size_t i) {
  return dir / ("data_batch_" + std::to_string(i + 1) + ".bin");
}

}  // namespace

BatchSet write_batches(std::span<const ImageSample> samples, BatchManifest manifest,
                       const std::filesystem::path& dir, std::size_t max_records) {
  if (max_records == 0) throw ConfigError("records per batch must be positive");
  std::filesystem::create_directories(dir);
  const Dims dims{manifest.height, manifest.width};
  const std::size_t labels = manifest.label_set.empty() ? 0 : label_count(parse_label_set(manifest.label_set));

  BatchSet set{dir, {}, {}};
  manifest.records_per_batch.clear();
  std::string ids;
  for (std::size_t start = 0; start < samples.size(); start += max_records) {
    auto chunk = samples.subspan(start, std::min(max_records, samples.size() - start));
    for (const auto& s : chunk) {
      if (labels && s.label_id >= labels) throw InputError("label id out of range for sample '" + s.card_id + "'");
      ids += s.card_id + "\n";
    }
    auto path = batch_file(dir, manifest.records_per_batch.size());
    detail::write_bytes(path, encode_batch(chunk, dims));
    set.files.push_back(path);
    manifest.records_per_batch.push_back(chunk.size());
  }
  detail::write_text(dir / "cards.txt", ids);
  detail::write_text(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  set.manifest = std::move(manifest);
  return set;
}

BatchSet open_batches(const std::filesystem::path& dir) {
  BatchSet set{dir, {}, {}};
  json j;
  try {
    j = json::parse(detail::read_text(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
  set.manifest = BatchManifest::from_json(j);
  for (std::size_t i = 0; i < set.manifest.records_per_batch.size(); ++i) set.files.push_back(batch_file(dir, i));
  return set;
}

std::vector<ImageSample> read_batches(const std::filesystem::path& dir) {
  BatchSet set = open_batches(dir);
  std::vector<std::string> ids;
  {
    std::istringstream in(detail::read_text(dir / "cards.txt"));
    for (std::string line; std::getline(in, line);) ids.push_back(line);
  }
  if (ids.size() != set.manifest.total_records())
    throw FormatError((dir / "cards.txt").string() + ": card id count does not match manifest");

  std::vector<ImageSample> out;
  for (std::size_t i = 0; i < set.files.size(); ++i) {
    auto name = set.files[i].filename().string();
    auto samples = decode_batch(detail::read_bytes(set.files[i]), name);
    if (samples.size() != set.manifest.records_per_batch[i])
      throw FormatError(name + ": record count mismatch with manifest");
    for (auto& s : samples) {
      if (s.image.height != set.manifest.height || s.image.width != set.manifest.width)
        throw FormatError(name + ": dimensions differ from manifest");
      s.card_id = ids[out.size()];
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_text_samples(const std::filesystem::path& path, std::span<const TextSample> samples) {
  std::string out;
  for (const auto& s : samples)
    out += json{{"card_id", s.card_id}, {"label_id", s.label_id}, {"tokens", s.token_ids}}.dump() + "\n";
  detail::write_text(path, out);
}

std::vector<TextSample> read_text_samples(const std::filesystem::path& path) {
  std::istringstream in(detail::read_text(path));
  std::vector<TextSample> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      out.push_back({j.at("tokens").get<std::vector<std::int32_t>>(), j.at("label_id").get<std::uint16_t>(),
                     j.at("card_id").get<std::string>()});
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cardnet
