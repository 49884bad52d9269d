#include "cardnet/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cardnet/error.hpp"
#include "cardnet/kernels.hpp"

namespace cardnet::nn {

using kernels::Trans;

template <class T>
Param<T>::Param(std::string n, std::vector<std::size_t> s) : name(std::move(n)), shape(std::move(s)) {
  std::size_t total = 1;
  for (auto d : shape) total *= d;
  value.assign(total, T(0));
  grad.assign(total, T(0));
}

template <class T>
void Param<T>::zero_grad() {
  std::fill(grad.begin(), grad.end(), T(0));
}

template <class T>
void gaussian_fill(std::span<T> values, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : values) v = static_cast<T>(dist(rng));
}

template <class T>
void uniform_fill(std::span<T> values, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : values) v = static_cast<T>(dist(rng));
}

// ---------------------------------------------------------------------------
// Conv2d

template <class T>
Conv2d<T>::Conv2d(Shape in, std::size_t out_channels, std::size_t kernel, std::string name)
    : in_(in),
      out_channels_(out_channels),
      kernel_(kernel),
      pad_(kernel / 2),
      weight_(name + ".weight", {out_channels, in.c, kernel, kernel}),
      bias_(name + ".bias", {out_channels}),
      col_(in.c * kernel * kernel * in.h * in.w),
      dcol_(col_.size()) {
  if (kernel % 2 == 0) throw ConfigError("convolution kernel must be odd");
}

template <class T>
void Conv2d<T>::forward(std::span<const T> in, std::span<T> out, bool) {
  const std::size_t H = in_.h, W = in_.w, HW = H * W, k = kernel_;
  for (std::size_t c = 0; c < in_.c; ++c)
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = &col_[((c * k + ky) * k + kx) * HW];
        for (std::size_t y = 0; y < H; ++y) {
          const auto iy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad_);
          for (std::size_t x = 0; x < W; ++x) {
            const auto ix = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad_);
            const bool inside = iy >= 0 && iy < std::ptrdiff_t(H) && ix >= 0 && ix < std::ptrdiff_t(W);
            row[y * W + x] = inside ? in[c * HW + std::size_t(iy) * W + std::size_t(ix)] : T(0);
          }
        }
      }
  const std::size_t K = in_.c * k * k;
  kernels::gemm<T>(Trans::No, Trans::No, out_channels_, HW, K, T(1), weight_.value.data(), K, col_.data(), HW,
                   T(0), out.data(), HW);
  for (std::size_t f = 0; f < out_channels_; ++f) {
    const T b = bias_.value[f];
    for (std::size_t i = 0; i < HW; ++i) out[f * HW + i] += b;
  }
}

template <class T>
void Conv2d<T>::backward(std::span<const T>, std::span<const T>, std::span<const T> dout, std::span<T> din) {
  const std::size_t H = in_.h, W = in_.w, HW = H * W, k = kernel_, K = in_.c * k * k;
  kernels::gemm<T>(Trans::No, Trans::Yes, out_channels_, K, HW, T(1), dout.data(), HW, col_.data(), HW, T(1),
                   weight_.grad.data(), K);
  for (std::size_t f = 0; f < out_channels_; ++f) {
    T acc = 0;
    for (std::size_t i = 0; i < HW; ++i) acc += dout[f * HW + i];
    bias_.grad[f] += acc;
  }
  if (din.empty()) return;
  kernels::gemm<T>(Trans::Yes, Trans::No, K, HW, out_channels_, T(1), weight_.value.data(), K, dout.data(), HW,
                   T(0), dcol_.data(), HW);
  std::fill(din.begin(), din.end(), T(0));
  for (std::size_t c = 0; c < in_.c; ++c)
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = &dcol_[((c * k + ky) * k + kx) * HW];
        for (std::size_t y = 0; y < H; ++y) {
          const auto iy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad_);
          if (iy < 0 || iy >= std::ptrdiff_t(H)) continue;
          for (std::size_t x = 0; x < W; ++x) {
            const auto ix = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad_);
            if (ix < 0 || ix >= std::ptrdiff_t(W)) continue;
            din[c * HW + std::size_t(iy) * W + std::size_t(ix)] += row[y * W + x];
          }
        }
      }
}

// ---------------------------------------------------------------------------
// Relu

template <class T>
void Relu<T>::forward(std::span<const T> in, std::span<T> out, bool) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

template <class T>
void Relu<T>::backward(std::span<const T>, std::span<const T> out, std::span<const T> dout, std::span<T> din) {
  if (din.empty()) return;
  for (std::size_t i = 0; i < out.size(); ++i) din[i] = out[i] > T(0) ? dout[i] : T(0);
}

// ---------------------------------------------------------------------------
// MaxPool

template <class T>
MaxPool<T>::MaxPool(Shape in, std::size_t window, std::size_t stride) : in_(in), window_(window), stride_(stride) {
  if (window == 0 || stride == 0) throw ConfigError("pool window and stride must be positive");
  out_ = {in.c, (in.h + stride - 1) / stride, (in.w + stride - 1) / stride};
  auto pad_total = [&](std::size_t n_in, std::size_t n_out) {
    const std::size_t need = (n_out - 1) * stride + window;
    return need > n_in ? need - n_in : 0;
  };
  pad_top_ = pad_total(in.h, out_.h) / 2;
  pad_left_ = pad_total(in.w, out_.w) / 2;
  argmax_.resize(out_.size());
}

template <class T>
void MaxPool<T>::forward(std::span<const T> in, std::span<T> out, bool) {
  const std::size_t H = in_.h, W = in_.w;
  for (std::size_t c = 0; c < in_.c; ++c)
    for (std::size_t oy = 0; oy < out_.h; ++oy)
      for (std::size_t ox = 0; ox < out_.w; ++ox) {
        const auto y0 = static_cast<std::ptrdiff_t>(oy * stride_) - static_cast<std::ptrdiff_t>(pad_top_);
        const auto x0 = static_cast<std::ptrdiff_t>(ox * stride_) - static_cast<std::ptrdiff_t>(pad_left_);
        T best = -std::numeric_limits<T>::infinity();
        std::size_t best_i = 0;
        for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(y0, 0); y < std::min<std::ptrdiff_t>(y0 + window_, H); ++y)
          for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(x0, 0); x < std::min<std::ptrdiff_t>(x0 + window_, W); ++x) {
            const std::size_t i = c * H * W + std::size_t(y) * W + std::size_t(x);
            if (in[i] > best) {
              best = in[i];
              best_i = i;
            }
          }
        const std::size_t o = (c * out_.h + oy) * out_.w + ox;
        out[o] = best;
        argmax_[o] = best_i;
      }
}

template <class T>
void MaxPool<T>::backward(std::span<const T>, std::span<const T>, std::span<const T> dout, std::span<T> din) {
  if (din.empty()) return;
  std::fill(din.begin(), din.end(), T(0));
  for (std::size_t o = 0; o < dout.size(); ++o) din[argmax_[o]] += dout[o];
}

// ---------------------------------------------------------------------------
// LocalResponseNorm

template <class T>
LocalResponseNorm<T>::LocalResponseNorm(Shape shape, std::size_t radius, double bias, double alpha, double beta)
    : shape_(shape), radius_(radius), bias_(T(bias)), alpha_(T(alpha)), beta_(T(beta)), scale_(shape.size()) {}

template <class T>
void LocalResponseNorm<T>::forward(std::span<const T> in, std::span<T> out, bool) {
  const std::size_t C = shape_.c, HW = shape_.h * shape_.w;
  for (std::size_t p = 0; p < HW; ++p)
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t lo = c >= radius_ ? c - radius_ : 0, hi = std::min(C - 1, c + radius_);
      T sum = 0;
      for (std::size_t j = lo; j <= hi; ++j) sum += in[j * HW + p] * in[j * HW + p];
      const T s = bias_ + alpha_ * sum;
      scale_[c * HW + p] = s;
      out[c * HW + p] = in[c * HW + p] * std::pow(s, -beta_);
    }
}

template <class T>
void LocalResponseNorm<T>::backward(std::span<const T> in, std::span<const T>, std::span<const T> dout,
                                    std::span<T> din) {
  if (din.empty()) return;
  const std::size_t C = shape_.c, HW = shape_.h * shape_.w;
  std::vector<T> ratio(C);
  for (std::size_t p = 0; p < HW; ++p) {
    // ratio_j = g_j · a_j · s_j^(−β−1)
    for (std::size_t j = 0; j < C; ++j)
      ratio[j] = dout[j * HW + p] * in[j * HW + p] * std::pow(scale_[j * HW + p], -beta_ - T(1));
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t lo = c >= radius_ ? c - radius_ : 0, hi = std::min(C - 1, c + radius_);
      T acc = 0;
      for (std::size_t j = lo; j <= hi; ++j) acc += ratio[j];
      const std::size_t i = c * HW + p;
      din[i] = dout[i] * std::pow(scale_[i], -beta_) - T(2) * alpha_ * beta_ * in[i] * acc;
    }
  }
}

// ---------------------------------------------------------------------------
// Dense

template <class T>
Dense<T>::Dense(std::size_t in, std::size_t out, std::string name, std::string_view kind)
    : in_(in), out_(out), kind_(kind), weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {}

template <class T>
void Dense<T>::forward(std::span<const T> in, std::span<T> out, bool) {
  kernels::gemm<T>(Trans::No, Trans::Yes, 1, out_, in_, T(1), in.data(), in_, weight_.value.data(), in_, T(0),
                   out.data(), out_);
  for (std::size_t o = 0; o < out_; ++o) out[o] += bias_.value[o];
}

template <class T>
void Dense<T>::backward(std::span<const T> in, std::span<const T>, std::span<const T> dout, std::span<T> din) {
  kernels::gemm<T>(Trans::No, Trans::No, out_, in_, 1, T(1), dout.data(), 1, in.data(), in_, T(1),
                   weight_.grad.data(), in_);
  for (std::size_t o = 0; o < out_; ++o) bias_.grad[o] += dout[o];
  if (din.empty()) return;
  kernels::gemm<T>(Trans::No, Trans::No, 1, in_, out_, T(1), dout.data(), out_, weight_.value.data(), in_, T(0),
                   din.data(), in_);
}

// ---------------------------------------------------------------------------
// Dropout

template <class T>
Dropout<T>::Dropout(Shape shape, double rate, std::uint64_t seed)
    : shape_(shape), rate_(rate), rng_(seed), mask_(shape.size(), T(1)) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

template <class T>
void Dropout<T>::forward(std::span<const T> in, std::span<T> out, bool training) {
  if (!training || rate_ == 0.0) {
    std::fill(mask_.begin(), mask_.end(), T(1));
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  std::bernoulli_distribution keep(1.0 - rate_);
  const T scale = T(1.0 / (1.0 - rate_));
  for (std::size_t i = 0; i < in.size(); ++i) {
    mask_[i] = keep(rng_) ? scale : T(0);
    out[i] = in[i] * mask_[i];
  }
}

template <class T>
void Dropout<T>::backward(std::span<const T>, std::span<const T>, std::span<const T> dout, std::span<T> din) {
  if (din.empty()) return;
  for (std::size_t i = 0; i < dout.size(); ++i) din[i] = dout[i] * mask_[i];
}

// ---------------------------------------------------------------------------
// Sequential

template <class T>
std::span<const T> Sequential<T>::forward(std::span<const T> input, bool training) {
  if (input.size() != input_.size())
    throw InputError("network input has " + std::to_string(input.size()) + " values, expected " +
                     std::to_string(input_.size()));
  input_copy_.assign(input.begin(), input.end());
  std::span<const T> cur = input_copy_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->forward(cur, acts_[i], training);
    cur = acts_[i];
  }
  return cur;
}

template <class T>
void Sequential<T>::backward(std::span<const T> doutput) {
  std::span<const T> grad = doutput;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    std::span<const T> in = i == 0 ? std::span<const T>(input_copy_) : std::span<const T>(acts_[i - 1]);
    std::span<T> din = i == 0 ? std::span<T>() : std::span<T>(grads_[i - 1]);
    layers_[i]->backward(in, acts_[i], grad, din);
    if (i > 0) grad = grads_[i - 1];
  }
}

template <class T>
std::vector<Param<T>*> Sequential<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_)
    for (auto* p : l->params()) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------

template <class T>
T softmax_cross_entropy(std::span<const T> logits, std::size_t label, std::span<T> dlogits) {
  double mx = -std::numeric_limits<double>::infinity();
  for (T v : logits) mx = std::max(mx, double(v));
  double z = 0;
  for (T v : logits) z += std::exp(double(v) - mx);
  const double log_z = mx + std::log(z);
  if (!dlogits.empty())
    for (std::size_t i = 0; i < logits.size(); ++i)
      dlogits[i] = static_cast<T>(std::exp(double(logits[i]) - log_z) - (i == label ? 1.0 : 0.0));
  return static_cast<T>(log_z - double(logits[label]));
}

template <class T>
void Sgd<T>::step(std::span<Param<T>* const> params, double scale) {
  if (velocity_.size() != params.size()) {
    velocity_.clear();
    for (auto* p : params) velocity_.emplace_back(p->size(), T(0));
  }
  const T lr = T(lr_ * scale), mu = T(momentum_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& v = velocity_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = mu * v[i] - lr * p.grad[i];
      p.value[i] += v[i];
    }
    p.zero_grad();
  }
}

template <class T>
void Adam<T>::step(std::span<Param<T>* const> params, double scale) {
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (auto* p : params) {
      m_.emplace_back(p->size(), T(0));
      v_.emplace_back(p->size(), T(0));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, double(t_)), c2 = 1.0 - std::pow(b2_, double(t_));
  const T step = T(lr_ * std::sqrt(c2) / c1);
  const T b1 = T(b1_), b2 = T(b2_), eps = T(eps_ * std::sqrt(c2)), s = T(scale);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const T g = p.grad[i] * s;
      m[i] = b1 * m[i] + (T(1) - b1) * g;
      v[i] = b2 * v[i] + (T(1) - b2) * g * g;
      p.value[i] -= step * m[i] / (std::sqrt(v[i]) + eps);
    }
    p.zero_grad();
  }
}

template <class T>
double clip_grad_norm(std::span<Param<T>* const> params, double max_norm) {
  double sq = 0;
  for (auto* p : params)
    for (T g : p->grad) sq += double(g) * double(g);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const T f = T(max_norm / norm);
    for (auto* p : params)
      for (T& g : p->grad) g *= f;
  }
  return norm;
}

#define CARDNET_INSTANTIATE(T)                                                              \
  template struct Param<T>;                                                                 \
  template void gaussian_fill<T>(std::span<T>, double, std::mt19937_64&);                   \
  template void uniform_fill<T>(std::span<T>, double, std::mt19937_64&);                    \
  template class Conv2d<T>;                                                                 \
  template class Relu<T>;                                                                   \
  template class MaxPool<T>;                                                                \
  template class LocalResponseNorm<T>;                                                      \
  template class Dense<T>;                                                                  \
  template class Dropout<T>;                                                                \
  template class Sequential<T>;                                                             \
  template T softmax_cross_entropy<T>(std::span<const T>, std::size_t, std::span<T>);       \
  template class Sgd<T>;                                                                    \
  template class Adam<T>;                                                                   \
  template double clip_grad_norm<T>(std::span<Param<T>* const>, double);

CARDNET_INSTANTIATE(float)
CARDNET_INSTANTIATE(double)
#undef CARDNET_INSTANTIATE

}  // namespace cardnet::nn
