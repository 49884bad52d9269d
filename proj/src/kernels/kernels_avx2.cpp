// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the runtime CPU check in kernels.cpp. It avoids
// standard-library templates so no AVX-encoded copy of a shared inline
// function can leak into the rest of the program.

#include <immintrin.h>

#include "cardnet/kernels.hpp"

namespace cardnet::kernels::avx2 {
namespace {

template <class T>
struct Vec;

template <>
struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t width = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg set1(float v) { return _mm256_set1_ps(v); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static float hsum(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, lo);
    lo = _mm_add_ss(lo, sh);
    return _mm_cvtss_f32(lo);
  }
};

template <>
struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t width = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static double hsum(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d h = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, h));
  }
};

// Accumulate R rows × (2 vectors) of C += alpha * A(i.., :) * B(:, j..).
// A is addressed with (row_stride, col_stride) so the same block serves the
// NN and TN layouts.
template <class T, int R>
inline void block_rows_2v(std::size_t k, T alpha, const T* a, std::size_t ars, std::size_t acs,
                          const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  using V = Vec<T>;
  typename V::reg acc0[R], acc1[R];
  for (int r = 0; r < R; ++r) acc0[r] = acc1[r] = V::zero();
  for (std::size_t p = 0; p < k; ++p) {
    auto b0 = V::load(b + p * ldb);
    auto b1 = V::load(b + p * ldb + V::width);
    for (int r = 0; r < R; ++r) {
      auto av = V::set1(a[r * ars + p * acs]);
      acc0[r] = V::fmadd(av, b0, acc0[r]);
      acc1[r] = V::fmadd(av, b1, acc1[r]);
    }
  }
  auto al = V::set1(alpha);
  for (int r = 0; r < R; ++r) {
    T* row = c + r * ldc;
    V::store(row, V::fmadd(al, acc0[r], V::load(row)));
    V::store(row + V::width, V::fmadd(al, acc1[r], V::load(row + V::width)));
  }
}

template <class T, int R>
inline void block_rows_1v(std::size_t k, T alpha, const T* a, std::size_t ars, std::size_t acs,
                          const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  using V = Vec<T>;
  typename V::reg acc[R];
  for (int r = 0; r < R; ++r) acc[r] = V::zero();
  for (std::size_t p = 0; p < k; ++p) {
    auto b0 = V::load(b + p * ldb);
    for (int r = 0; r < R; ++r) acc[r] = V::fmadd(V::set1(a[r * ars + p * acs]), b0, acc[r]);
  }
  auto al = V::set1(alpha);
  for (int r = 0; r < R; ++r) V::store(c + r * ldc, V::fmadd(al, acc[r], V::load(c + r * ldc)));
}

template <class T, int R>
inline void block_rows_tail(std::size_t cols, std::size_t k, T alpha, const T* a, std::size_t ars,
                            std::size_t acs, const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  for (int r = 0; r < R; ++r)
    for (std::size_t j = 0; j < cols; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[r * ars + p * acs] * b[p * ldb + j];
      c[r * ldc + j] += alpha * acc;
    }
}

template <class T, int R>
void row_panel(std::size_t n, std::size_t k, T alpha, const T* a, std::size_t ars, std::size_t acs,
               const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  constexpr std::size_t w = Vec<T>::width;
  std::size_t j = 0;
  for (; j + 2 * w <= n; j += 2 * w) block_rows_2v<T, R>(k, alpha, a, ars, acs, b + j, ldb, c + j, ldc);
  for (; j + w <= n; j += w) block_rows_1v<T, R>(k, alpha, a, ars, acs, b + j, ldb, c + j, ldc);
  if (j < n) block_rows_tail<T, R>(n - j, k, alpha, a, ars, acs, b + j, ldb, c + j, ldc);
}

template <class T>
T dot_impl(const T* x, const T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t w = V::width;
  auto a0 = V::zero(), a1 = V::zero(), a2 = V::zero(), a3 = V::zero();
  std::size_t i = 0;
  for (; i + 4 * w <= n; i += 4 * w) {
    a0 = V::fmadd(V::load(x + i), V::load(y + i), a0);
    a1 = V::fmadd(V::load(x + i + w), V::load(y + i + w), a1);
    a2 = V::fmadd(V::load(x + i + 2 * w), V::load(y + i + 2 * w), a2);
    a3 = V::fmadd(V::load(x + i + 3 * w), V::load(y + i + 3 * w), a3);
  }
  for (; i + w <= n; i += w) a0 = V::fmadd(V::load(x + i), V::load(y + i), a0);
  T acc = V::hsum(V::add(V::add(a0, a1), V::add(a2, a3)));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

// C(i, j) += alpha * <A row i, B row j>: the NT layout, contiguous along k.
template <class T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a, std::size_t lda,
             const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  using V = Vec<T>;
  constexpr std::size_t w = V::width;
  for (std::size_t i = 0; i < m; ++i) {
    const T* ar = a + i * lda;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const T* b0 = b + j * ldb;
      const T* b1 = b0 + ldb;
      const T* b2 = b1 + ldb;
      const T* b3 = b2 + ldb;
      auto s0 = V::zero(), s1 = V::zero(), s2 = V::zero(), s3 = V::zero();
      std::size_t p = 0;
      for (; p + w <= k; p += w) {
        auto av = V::load(ar + p);
        s0 = V::fmadd(av, V::load(b0 + p), s0);
        s1 = V::fmadd(av, V::load(b1 + p), s1);
        s2 = V::fmadd(av, V::load(b2 + p), s2);
        s3 = V::fmadd(av, V::load(b3 + p), s3);
      }
      T r0 = V::hsum(s0), r1 = V::hsum(s1), r2 = V::hsum(s2), r3 = V::hsum(s3);
      for (; p < k; ++p) {
        r0 += ar[p] * b0[p];
        r1 += ar[p] * b1[p];
        r2 += ar[p] * b2[p];
        r3 += ar[p] * b3[p];
      }
      T* cr = c + i * ldc + j;
      cr[0] += alpha * r0;
      cr[1] += alpha * r1;
      cr[2] += alpha * r2;
      cr[3] += alpha * r3;
    }
    for (; j < n; ++j) c[i * ldc + j] += alpha * dot_impl(ar, b + j * ldb, k);
  }
}

template <class T>
void scale_c(std::size_t m, std::size_t n, T beta, T* c, std::size_t ldc) {
  if (beta == T(1)) return;
  using V = Vec<T>;
  constexpr std::size_t w = V::width;
  auto bv = V::set1(beta);
  for (std::size_t i = 0; i < m; ++i) {
    T* row = c + i * ldc;
    std::size_t j = 0;
    if (beta == T(0)) {
      for (; j + w <= n; j += w) V::store(row + j, V::zero());
      for (; j < n; ++j) row[j] = 0;
    } else {
      for (; j + w <= n; j += w) V::store(row + j, V::mul(bv, V::load(row + j)));
      for (; j < n; ++j) row[j] *= beta;
    }
  }
}

}  // namespace

template <class T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc) {
  scale_c(m, n, beta, c, ldc);
  if (m == 0 || n == 0 || k == 0 || alpha == T(0)) return;

  if (tb == Trans::Yes) {
    // Caller guarantees ta == No here.
    gemm_nt(m, n, k, alpha, a, lda, b, ldb, c, ldc);
    return;
  }
  const std::size_t ars = ta == Trans::No ? lda : 1;
  const std::size_t acs = ta == Trans::No ? 1 : lda;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) row_panel<T, 4>(n, k, alpha, a + i * ars, ars, acs, b, ldb, c + i * ldc, ldc);
  switch (m - i) {
    case 3: row_panel<T, 3>(n, k, alpha, a + i * ars, ars, acs, b, ldb, c + i * ldc, ldc); break;
    case 2: row_panel<T, 2>(n, k, alpha, a + i * ars, ars, acs, b, ldb, c + i * ldc, ldc); break;
    case 1: row_panel<T, 1>(n, k, alpha, a + i * ars, ars, acs, b, ldb, c + i * ldc, ldc); break;
    default: break;
  }
}

template <class T>
T dot(const T* x, const T* y, std::size_t n) {
  return dot_impl(x, y, n);
}

template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  using V = Vec<T>;
  constexpr std::size_t w = V::width;
  auto al = V::set1(alpha);
  std::size_t i = 0;
  for (; i + w <= n; i += w) V::store(y + i, V::fmadd(al, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double out = Vec<double>::hsum(acc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    out += d < 0 ? -d : d;
  }
  return out;
}

#define CARDNET_INSTANTIATE(T)                                                                   \
  template void gemm<T>(Trans, Trans, std::size_t, std::size_t, std::size_t, T, const T*,        \
                        std::size_t, const T*, std::size_t, T, T*, std::size_t);                 \
  template T dot<T>(const T*, const T*, std::size_t);                                            \
  template void axpy<T>(std::size_t, T, const T*, T*);

CARDNET_INSTANTIATE(float)
CARDNET_INSTANTIATE(double)
#undef CARDNET_INSTANTIATE

}  // namespace cardnet::kernels::avx2
