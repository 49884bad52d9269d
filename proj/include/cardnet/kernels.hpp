#pragma once

// Dense arithmetic kernels used by every network in the library.
//
// Each kernel exists as a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is picked once at runtime from CPUID and can be
// forced with set_isa() or the CARDNET_ISA environment variable ("scalar" or
// "avx2"). Results are deterministic for a fixed ISA; variants agree with the
// reference up to floating-point reassociation.

#include <cstddef>
#include <span>
#include <string_view>

namespace cardnet::kernels {

enum class Isa { Scalar, Avx2 };

bool isa_available(Isa isa);
Isa active_isa();
/// Throws ConfigError if the ISA is not available on this machine/build.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

enum class Trans : bool { No = false, Yes = true };

/// Row-major C = alpha * op(A) * op(B) + beta * C with op(A) m×k and op(B) k×n.
/// When beta == 0, C is overwritten without being read.
template <class T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

template <class T>
T dot(std::span<const T> x, std::span<const T> y);

/// y += alpha * x
template <class T>
void axpy(T alpha, std::span<const T> x, std::span<T> y);

/// Σ |a_i - b_i|
double l1_distance(std::span<const double> a, std::span<const double> b);

// Direct access to one variant, for equivalence tests and benchmarks.
namespace scalar {
template <class T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);
template <class T>
T dot(const T* x, const T* y, std::size_t n);
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y);
double l1_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
// Transposed A is read with strides; transposed B must not also have
// transposed A (the dispatcher packs that case).
template <class T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);
template <class T>
T dot(const T* x, const T* y, std::size_t n);
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y);
double l1_distance(const double* a, const double* b, std::size_t n);
}  // namespace avx2

}  // namespace cardnet::kernels
