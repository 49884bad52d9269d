#include "cardnet/pipeline.hpp"

#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include "cardnet/error.hpp"
#include "cardnet/fetch.hpp"
#include "io.hpp"

namespace cardnet {

std::optional<std::filesystem::path> find_card_image(const Card& card, const std::filesystem::path& images_dir) {
  namespace fs = std::filesystem;
  if (!card.image_ref.empty() && card.image_ref.find("://") == std::string::npos) {
    const fs::path ref(card.image_ref);
    const fs::path candidate = ref.is_absolute() ? ref : images_dir / ref;
    if (fs::is_regular_file(candidate)) return candidate;
  }
  const auto stem = fetch_file_stem(card.id);
  for (const char* ext : {".jpg", ".jpeg", ".png", ".ppm"}) {
    auto candidate = images_dir / (stem + ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

std::size_t add_augmented(std::vector<ImageSample>& train, const AugmentConfig& config, double ratio,
                          std::uint64_t seed) {
  if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw ConfigError("augmentation ratio must be non-negative");
  if (train.empty()) return 0;
  config.validate(train.front().image.dims());
  const auto copies = static_cast<std::size_t>(std::llround(ratio * double(train.size())));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  const std::size_t original = train.size();
  train.reserve(original + copies);
  for (std::size_t i = 0; i < copies; ++i) {
    const std::size_t src = pick(rng) % original;
    ImageSample s{augment(train[src].image, rng(), config), train[src].label_id, train[src].card_id};
    train.push_back(std::move(s));
  }
  return copies;
}

ImageDataset build_image_dataset(const Corpus& corpus, const std::filesystem::path& images_dir,
                                 const ImageDatasetOptions& options) {
  options.split.validate();
  options.augment.validate(options.dims);
  ImageDataset out;
  std::vector<ImageSample> samples;
  for (const auto& card : corpus.cards) {
    const auto labels = card_labels(card, options.labels);
    if (labels.empty()) continue;
    const auto path = find_card_image(card, images_dir);
    if (!path) {
      out.missing_images.push_back(card.id);
      continue;
    }
    Image image;
    try {
      image = decode_and_resize(detail::read_bytes(*path), options.dims);
    } catch (const DecodeError& e) {
      throw DecodeError("card '" + card.id + "': " + e.what());
    }
    for (auto label : labels) samples.push_back({image, label, card.id});
  }
  if (samples.empty()) throw InputError("no card in the corpus has a usable image under " + images_dir.string());
  auto [train, eval] = split(std::move(samples), options.split);
  out.augmented = add_augmented(train, options.augment, options.augment_ratio, options.seed ^ 0xa5a5a5a5ULL);
  out.train = std::move(train);
  out.eval = std::move(eval);
  return out;
}

TextDataset build_text_dataset(const Corpus& corpus, const TextDatasetOptions& options) {
  options.split.validate();
  if (options.max_len == 0) throw ConfigError("max_len must be positive");
  const auto pairs = expand_multilabel(corpus, options.labels);
  if (pairs.empty()) throw InputError("corpus yields no labeled text samples");

  std::vector<std::string> ids;
  for (const auto& p : pairs) ids.push_back(p.card_id);
  const auto mask = split_mask(ids, options.split);

  std::unordered_map<std::string_view, const Card*> by_id;
  for (const auto& c : corpus.cards) by_id.emplace(c.id, &c);

  std::vector<std::string> train_texts;
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (mask[i] && seen.insert(pairs[i].card_id).second)
      train_texts.push_back(classifier_text(*by_id.at(pairs[i].card_id)));

  TextDataset out{build_text_vocab(train_texts, options.min_count), {}, {}};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Card& card = *by_id.at(pairs[i].card_id);
    TextSample s{encode_text(classifier_text(card), out.vocab, options.max_len), pairs[i].label_id, card.id};
    (mask[i] ? out.train : out.eval).push_back(std::move(s));
  }
  return out;
}

}  // namespace cardnet
