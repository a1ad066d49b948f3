#pragma once

// Data-parallel reductions over observation-length vectors. Every routine has a
// scalar reference version; vectorised versions (AVX2+FMA on x86-64, NEON on
// aarch64) are selected at runtime and are tested for equivalence with the
// scalar path. Results of different backends agree up to summation-order
// rounding, so the backend in use is recorded in run manifests.

#include <cstddef>
#include <span>
#include <string_view>

namespace glmebic::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend backend) noexcept;

struct KernelTable {
  Backend backend;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i w[i] * a[i] * b[i]
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // Upper triangle (then mirrored) of sum_i w[i] * c_a[i] * c_b[i] for k columns.
  // `out` is k*k row-major.
  void (*weighted_gram)(const double* w, const double* const* cols, std::size_t k,
                        std::size_t n, double* out);
};

const KernelTable& scalar_table() noexcept;

/// Vectorised table for this build and CPU, or nullptr when unavailable.
const KernelTable* simd_table() noexcept;

/// Table used by the library. Chosen once from the CPU (the environment
/// variable GLMEBIC_KERNELS=scalar forces the reference path) and can be
/// switched with `use_backend`.
const KernelTable& active() noexcept;

/// Returns false when the requested backend is not available.
bool use_backend(Backend backend) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double weighted_dot(std::span<const double> w, std::span<const double> a,
                           std::span<const double> b) {
  return active().weighted_dot(w.data(), a.data(), b.data(), w.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void weighted_gram_scalar(const double* w, const double* const* cols, std::size_t k,
                          std::size_t n, double* out);

// Defined only in builds that compile the matching translation unit; the
// dispatcher checks CPU support before handing these out.
const KernelTable& avx2_table() noexcept;
const KernelTable& neon_table() noexcept;
}  // namespace detail

}  // namespace glmebic::kernels
