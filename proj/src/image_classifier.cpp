#include "cardnet/image_classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "cardnet/error.hpp"

namespace cardnet {

using nlohmann::json;

void CNNConfig::validate() const {
  if (input.height <= 0 || input.width <= 0) throw ConfigError("input dimensions must be positive");
  if (conv1_maps == 0 || conv2_maps == 0 || fc_width == 0) throw ConfigError("layer widths must be positive");
  if (kernel % 2 == 0) throw ConfigError("kernel size must be odd");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (plateau_epochs < 1) throw ConfigError("plateau epochs must be at least 1");
}

json CNNConfig::to_json() const {
  return json{{"height", input.height},
              {"width", input.width},
              {"labels", label_set_name(labels)},
              {"label_count", label_count()},
              {"conv1_maps", conv1_maps},
              {"conv2_maps", conv2_maps},
              {"kernel", kernel},
              {"pool_window", pool_window},
              {"pool_stride", pool_stride},
              {"lrn_radius", lrn_radius},
              {"lrn_bias", lrn_bias},
              {"lrn_alpha", lrn_alpha},
              {"lrn_beta", lrn_beta},
              {"fc_width", fc_width},
              {"learning_rate", learning_rate},
              {"momentum", momentum},
              {"lr_decay", lr_decay},
              {"plateau_epochs", plateau_epochs},
              {"epochs", epochs},
              {"batch_size", batch_size},
              {"conv_init_std", conv_init_std},
              {"fc_init_std", fc_init_std},
              {"seed", seed},
              {"layers", layer_order(*this)}};
}

CNNConfig CNNConfig::from_json(const json& j) {
  try {
    CNNConfig c;
    c.input = {j.at("height").get<int>(), j.at("width").get<int>()};
    c.labels = parse_label_set(j.at("labels").get<std::string>());
    c.conv1_maps = j.at("conv1_maps");
    c.conv2_maps = j.at("conv2_maps");
    c.kernel = j.at("kernel");
    c.pool_window = j.at("pool_window");
    c.pool_stride = j.at("pool_stride");
    c.lrn_radius = j.at("lrn_radius");
    c.lrn_bias = j.at("lrn_bias");
    c.lrn_alpha = j.at("lrn_alpha");
    c.lrn_beta = j.at("lrn_beta");
    c.fc_width = j.at("fc_width");
    c.learning_rate = j.at("learning_rate");
    c.momentum = j.at("momentum");
    c.lr_decay = j.at("lr_decay");
    c.plateau_epochs = j.at("plateau_epochs");
    c.epochs = j.at("epochs");
    c.batch_size = j.at("batch_size");
    c.conv_init_std = j.at("conv_init_std");
    c.fc_init_std = j.at("fc_init_std");
    c.seed = j.at("seed");
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("image model config: ") + e.what());
  }
}

template <class T>
nn::Sequential<T> build_image_network(const CNNConfig& config, std::mt19937_64& rng) {
  config.validate();
  nn::Shape in{3, std::size_t(config.input.height), std::size_t(config.input.width)};
  nn::Sequential<T> net(in);
  auto& conv1 = net.template add<nn::Conv2d<T>>(in, config.conv1_maps, config.kernel, "conv1");
  net.template add<nn::Relu<T>>(conv1.output_shape());
  auto& pool1 = net.template add<nn::MaxPool<T>>(conv1.output_shape(), config.pool_window, config.pool_stride);
  net.template add<nn::LocalResponseNorm<T>>(pool1.output_shape(), config.lrn_radius, config.lrn_bias,
                                             config.lrn_alpha, config.lrn_beta);
  auto& conv2 = net.template add<nn::Conv2d<T>>(pool1.output_shape(), config.conv2_maps, config.kernel, "conv2");
  net.template add<nn::Relu<T>>(conv2.output_shape());
  net.template add<nn::LocalResponseNorm<T>>(conv2.output_shape(), config.lrn_radius, config.lrn_bias,
                                             config.lrn_alpha, config.lrn_beta);
  auto& pool2 = net.template add<nn::MaxPool<T>>(conv2.output_shape(), config.pool_window, config.pool_stride);
  auto& fc = net.template add<nn::Dense<T>>(pool2.output_shape().size(), config.fc_width, "fc");
  net.template add<nn::Relu<T>>(fc.output_shape());
  auto& head = net.template add<nn::Dense<T>>(config.fc_width, config.label_count(), "softmax", "softmax");

  nn::gaussian_fill<T>(conv1.weight().value, config.conv_init_std, rng);
  nn::gaussian_fill<T>(conv2.weight().value, config.conv_init_std, rng);
  nn::gaussian_fill<T>(fc.weight().value, config.fc_init_std, rng);
  nn::gaussian_fill<T>(head.weight().value, config.fc_init_std, rng);
  return net;
}

template nn::Sequential<float> build_image_network<float>(const CNNConfig&, std::mt19937_64&);
template nn::Sequential<double> build_image_network<double>(const CNNConfig&, std::mt19937_64&);

std::vector<std::string> layer_order(const CNNConfig& config) {
  std::mt19937_64 rng(0);
  CNNConfig tiny = config;
  tiny.input = {4, 4};
  tiny.conv1_maps = tiny.conv2_maps = 1;
  tiny.fc_width = 1;
  auto net = build_image_network<float>(tiny, rng);
  std::vector<std::string> out;
  for (const auto& l : net.layers())
    if (l->kind() != "relu") out.emplace_back(l->kind());
  return out;
}

std::vector<float> image_to_input(const Image& image) {
  std::vector<float> out(image.pixels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (float(image.pixels[i]) - 127.5f) / 127.5f;
  return out;
}

// ---------------------------------------------------------------------------

ImageClassifier::ImageClassifier(const CNNConfig& config) : config_(config), mutex_(std::make_unique<std::mutex>()) {
  std::mt19937_64 rng(config.seed);
  net_ = std::make_unique<nn::Sequential<float>>(build_image_network<float>(config, rng));
}

ImageClassifier::ImageClassifier(ImageClassifier&&) noexcept = default;
ImageClassifier& ImageClassifier::operator=(ImageClassifier&&) noexcept = default;
ImageClassifier::~ImageClassifier() = default;

std::vector<float> ImageClassifier::logits(const Image& image) const {
  if (image.dims() != config_.input)
    throw InputError("image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                     ", model expects " + std::to_string(config_.input.height) + "x" +
                     std::to_string(config_.input.width));
  auto input = image_to_input(image);
  std::lock_guard lock(*mutex_);
  auto out = net_->forward(input, false);
  return {out.begin(), out.end()};
}

PredictionVector ImageClassifier::predict(const Image& image) const {
  auto l = logits(image);
  return PredictionVector::from_logits<float>(config_.labels, l);
}

nn::Artifact ImageClassifier::to_artifact() const {
  nn::Artifact a;
  a.kind = "image-cnn";
  a.config = config_.to_json();
  auto params = net_->params();
  a.store<float>(params);
  return a;
}

ImageClassifier ImageClassifier::from_artifact(const nn::Artifact& artifact) {
  artifact.expect_kind("image-cnn");
  ImageClassifier model(CNNConfig::from_json(artifact.config));
  auto params = model.net_->params();
  artifact.restore<float>(params);
  return model;
}

void ImageClassifier::save(const std::filesystem::path& path) const { to_artifact().save(path); }

ImageClassifier ImageClassifier::load(const std::filesystem::path& path) {
  return from_artifact(nn::Artifact::load(path));
}

// ---------------------------------------------------------------------------

namespace {

void check_samples(const CNNConfig& config, std::span<const ImageSample> samples, const char* which) {
  for (const auto& s : samples) {
    if (s.image.dims() != config.input)
      throw ConfigError(std::string(which) + " sample '" + s.card_id + "' does not match the configured input size");
    if (s.label_id >= config.label_count())
      throw ConfigError(std::string(which) + " sample '" + s.card_id + "' has a label outside the '" +
                        std::string(label_set_name(config.labels)) + "' label set");
  }
}

std::vector<std::size_t> canonical_order(std::span<const ImageSample> samples) {
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto &x = samples[a], &y = samples[b];
    if (x.card_id != y.card_id) return x.card_id < y.card_id;
    if (x.label_id != y.label_id) return x.label_id < y.label_id;
    return x.image.pixels < y.image.pixels;
  });
  return idx;
}

}  // namespace

double evaluate(const ImageClassifier& model, std::span<const ImageSample> eval) {
  if (eval.empty()) throw InputError("cannot evaluate on an empty set");
  std::vector<std::size_t> predicted;
  std::vector<std::string> ids;
  std::vector<std::uint16_t> labels;
  for (const auto& s : eval) {
    predicted.push_back(model.predict(s.image).argmax());
    ids.push_back(s.card_id);
    labels.push_back(s.label_id);
  }
  return per_card_accuracy(predicted, ids, labels);
}

TrainedImageModel train_image(const CNNConfig& config, std::span<const ImageSample> train,
                              std::span<const ImageSample> eval, const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw InputError("training set is empty");
  check_samples(config, train, "training");
  check_samples(config, eval, "evaluation");

  const auto start = std::chrono::steady_clock::now();
  ImageClassifier model(config);
  auto& net = model.network();
  auto params = net.params();
  nn::Sgd<float> sgd(config.learning_rate, config.momentum);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainReport report;
  report.kind = "image-cnn";
  report.config = config.to_json();

  auto order = canonical_order(train);
  std::vector<float> dlogits(config.label_count());
  double best_acc = -1.0;
  int stale = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      for (std::size_t i = b; i < end; ++i) {
        const auto& s = train[order[i]];
        auto input = image_to_input(s.image);
        auto logits = net.forward(input, true);
        const float loss = nn::softmax_cross_entropy<float>(logits, s.label_id, dlogits);
        if (!std::isfinite(loss))
          throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch) +
                                " (learning rate " + std::to_string(sgd.learning_rate()) + ")");
        loss_sum += loss;
        net.backward(dlogits);
      }
      sgd.step(params, 1.0 / double(end - b));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(order.size());
    rec.learning_rate = sgd.learning_rate();
    if (!std::isfinite(rec.train_loss))
      throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch));
    if (!eval.empty()) {
      rec.eval_accuracy = evaluate(model, eval);
      if (*rec.eval_accuracy > best_acc) {
        best_acc = *rec.eval_accuracy;
        stale = 0;
      } else if (++stale >= config.plateau_epochs) {
        sgd.set_learning_rate(sgd.learning_rate() * config.lr_decay);
        stale = 0;
      }
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  report.final_accuracy = report.epochs.back().eval_accuracy;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

}  // namespace cardnet
