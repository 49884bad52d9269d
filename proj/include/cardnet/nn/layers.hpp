#pragma once

// Minimal per-sample network building blocks. A network processes one sample at
// a time; parameter gradients accumulate across a minibatch until the optimizer
// consumes them. Every class is instantiated for float (training, inference)
// and double (gradient checks).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cardnet::nn {

struct Shape {
  std::size_t c = 1, h = 1, w = 1;
  std::size_t size() const { return c * h * w; }
  bool operator==(const Shape&) const = default;
};

template <class T>
struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Param(std::string n, std::vector<std::size_t> s);
  std::size_t size() const { return value.size(); }
  void zero_grad();
};

template <class T>
void gaussian_fill(std::span<T> values, double stddev, std::mt19937_64& rng);
template <class T>
void uniform_fill(std::span<T> values, double bound, std::mt19937_64& rng);

template <class T>
class Layer {
 public:
  virtual ~Layer() = default;
  /// One of "conv", "relu", "pool", "norm", "fully", "softmax", "dropout".
  virtual std::string_view kind() const = 0;
  virtual Shape output_shape() const = 0;
  virtual void forward(std::span<const T> in, std::span<T> out, bool training) = 0;
  /// `din` is empty when the caller does not need the input gradient.
  virtual void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
};

/// Same-padded, stride-1 convolution through im2col + GEMM.
template <class T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(Shape in, std::size_t out_channels, std::size_t kernel, std::string name);
  std::string_view kind() const override { return "conv"; }
  Shape output_shape() const override { return {out_channels_, in_.h, in_.w}; }
  void forward(std::span<const T> in, std::span<T> out, bool training) override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din) override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  Shape in_;
  std::size_t out_channels_, kernel_, pad_;
  Param<T> weight_, bias_;
  std::vector<T> col_, dcol_;
};

template <class T>
class Relu final : public Layer<T> {
 public:
  explicit Relu(Shape shape) : shape_(shape) {}
  std::string_view kind() const override { return "relu"; }
  Shape output_shape() const override { return shape_; }
  void forward(std::span<const T> in, std::span<T> out, bool training) override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din) override;

 private:
  Shape shape_;
};

/// Max pooling with TensorFlow-style SAME padding: output = ceil(input / stride).
template <class T>
class MaxPool final : public Layer<T> {
 public:
  MaxPool(Shape in, std::size_t window, std::size_t stride);
  std::string_view kind() const override { return "pool"; }
  Shape output_shape() const override { return out_; }
  void forward(std::span<const T> in, std::span<T> out, bool training) override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din) override;

 private:
  Shape in_, out_;
  std::size_t window_, stride_, pad_top_, pad_left_;
  std::vector<std::size_t> argmax_;
};

/// Cross-channel local response normalization:
/// b_c = a_c / (bias + alpha · Σ_{|j-c| <= radius} a_j²)^beta
template <class T>
class LocalResponseNorm final : public Layer<T> {
 public:
  LocalResponseNorm(Shape shape, std::size_t radius, double bias, double alpha, double beta);
  std::string_view kind() const override { return "norm"; }
  Shape output_shape() const override { return shape_; }
  void forward(std::span<const T> in, std::span<T> out, bool training) override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din) override;

 private:
  Shape shape_;
  std::size_t radius_;
  T bias_, alpha_, beta_;
  std::vector<T> scale_;
};

/// y = W x + b over the flattened input. `kind` distinguishes a hidden fully
/// connected layer from the softmax classifier head.
template <class T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in, std::size_t out, std::string name, std::string_view kind = "fully");
  std::string_view kind() const override { return kind_; }
  Shape output_shape() const override { return {out_, 1, 1}; }
  void forward(std::span<const T> in, std::span<T> out, bool training) override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din) override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  std::string kind_;
  Param<T> weight_, bias_;
};

/// Inverted dropout; identity outside training.
template <class T>
class Dropout final : public Layer<T> {
 public:
  Dropout(Shape shape, double rate, std::uint64_t seed);
  std::string_view kind() const override { return "dropout"; }
  Shape output_shape() const override { return shape_; }
  void forward(std::span<const T> in, std::span<T> out, bool training) override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din) override;

 private:
  Shape shape_;
  double rate_;
  std::mt19937_64 rng_;
  std::vector<T> mask_;
};

template <class T>
class Sequential {
 public:
  explicit Sequential(Shape input) : input_(input) {}
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <class L, class... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    acts_.emplace_back(ref.output_shape().size());
    grads_.emplace_back(ref.output_shape().size());
    return ref;
  }

  Shape input_shape() const { return input_; }
  Shape output_shape() const { return layers_.empty() ? input_ : layers_.back()->output_shape(); }
  const std::vector<std::unique_ptr<Layer<T>>>& layers() const { return layers_; }

  /// Returns the last layer's output; valid until the next forward.
  std::span<const T> forward(std::span<const T> input, bool training);
  /// Back-propagates from d(loss)/d(output) of the most recent forward,
  /// accumulating parameter gradients.
  void backward(std::span<const T> doutput);
  std::vector<Param<T>*> params();

 private:
  Shape input_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<T> input_copy_;
  std::vector<std::vector<T>> acts_, grads_;
};

/// Softmax cross-entropy for one sample. Writes softmax − onehot into dlogits
/// (when non-empty) and returns −log p[label].
template <class T>
T softmax_cross_entropy(std::span<const T> logits, std::size_t label, std::span<T> dlogits);

template <class T>
class Sgd {
 public:
  Sgd(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {}
  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }
  /// w += v where v = momentum·v − lr·scale·grad. Zeroes the gradients.
  void step(std::span<Param<T>* const> params, double scale);

 private:
  double lr_, momentum_;
  std::vector<std::vector<T>> velocity_;
};

template <class T>
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(eps) {}
  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }
  void step(std::span<Param<T>* const> params, double scale);

 private:
  double lr_, b1_, b2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

/// Scales all gradients so their global L2 norm is at most max_norm. Returns the pre-clip norm.
template <class T>
double clip_grad_norm(std::span<Param<T>* const> params, double max_norm);

}  // namespace cardnet::nn
