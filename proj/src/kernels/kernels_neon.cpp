// aarch64 only; Advanced SIMD is part of the base ISA there, so no runtime probe.

#include <arm_neon.h>

#include "glmebic/kernels.hpp"

namespace glmebic::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot_neon(const double* w, const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t t0 = vmulq_f64(vld1q_f64(w + i), vld1q_f64(a + i));
    const float64x2_t t1 = vmulq_f64(vld1q_f64(w + i + 2), vld1q_f64(a + i + 2));
    acc0 = vfmaq_f64(acc0, t0, vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, t1, vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void weighted_gram_neon(const double* w, const double* const* cols, std::size_t k,
                        std::size_t n, double* out) {
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      const double v = weighted_dot_neon(w, cols[a], cols[b], n);
      out[a * k + b] = v;
      out[b * k + a] = v;
    }
  }
}

constexpr KernelTable kNeonTable{Backend::Neon, dot_neon, weighted_dot_neon, axpy_neon,
                                 weighted_gram_neon};

}  // namespace

const KernelTable& neon_table() noexcept { return kNeonTable; }

}  // namespace glmebic::kernels::detail
