#include "cardnet/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <vector>

#include "cardnet/error.hpp"

namespace cardnet::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(CARDNET_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  Isa best = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  if (const char* env = std::getenv("CARDNET_ISA")) {
    std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && best == Isa::Avx2) return Isa::Avx2;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

bool use_avx2() {
#ifdef CARDNET_HAVE_AVX2
  return current().load(std::memory_order_relaxed) == Isa::Avx2;
#else
  return false;
#endif
}

}  // namespace

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw ConfigError("ISA '" + std::string(isa_name(isa)) + "' not available");
  current().store(isa);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

template <class T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc) {
#ifdef CARDNET_HAVE_AVX2
  if (use_avx2()) {
    if (ta == Trans::Yes && tb == Trans::Yes) {
      std::vector<T> bt(k * n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * ldb + p];
      avx2::gemm<T>(ta, Trans::No, m, n, k, alpha, a, lda, bt.data(), n, beta, c, ldc);
      return;
    }
    avx2::gemm<T>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    return;
  }
#endif
  scalar::gemm<T>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <class T>
T dot(std::span<const T> x, std::span<const T> y) {
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
#ifdef CARDNET_HAVE_AVX2
  if (use_avx2()) return avx2::dot<T>(x.data(), y.data(), n);
#endif
  return scalar::dot<T>(x.data(), y.data(), n);
}

template <class T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
#ifdef CARDNET_HAVE_AVX2
  if (use_avx2()) return avx2::axpy<T>(n, alpha, x.data(), y.data());
#endif
  scalar::axpy<T>(n, alpha, x.data(), y.data());
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
#ifdef CARDNET_HAVE_AVX2
  if (use_avx2()) return avx2::l1_distance(a.data(), b.data(), n);
#endif
  return scalar::l1_distance(a.data(), b.data(), n);
}

#define CARDNET_INSTANTIATE(T)                                                                   \
  template void gemm<T>(Trans, Trans, std::size_t, std::size_t, std::size_t, T, const T*,        \
                        std::size_t, const T*, std::size_t, T, T*, std::size_t);                 \
  template T dot<T>(std::span<const T>, std::span<const T>);                                     \
  template void axpy<T>(T, std::span<const T>, std::span<T>);

CARDNET_INSTANTIATE(float)
CARDNET_INSTANTIATE(double)
#undef CARDNET_INSTANTIATE

}  // namespace cardnet::kernels
