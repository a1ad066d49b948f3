// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.

#include <immintrin.h>

#include "glmebic/kernels.hpp"

namespace glmebic::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot_avx2(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d t0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    const __m256d t1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4));
    acc0 = _mm256_fmadd_pd(t0, _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(t1, _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    const __m256d t0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    acc0 = _mm256_fmadd_pd(t0, _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four right-hand columns per pass share the w*c_a product and its loads.
void weighted_gram_avx2(const double* w, const double* const* cols, std::size_t k,
                        std::size_t n, double* out) {
  const std::size_t n4 = n - n % 4;
  for (std::size_t a = 0; a < k; ++a) {
    const double* ca = cols[a];
    std::size_t b = a;
    for (; b + 4 <= k; b += 4) {
      const double* c0 = cols[b];
      const double* c1 = cols[b + 1];
      const double* c2 = cols[b + 2];
      const double* c3 = cols[b + 3];
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd();
      __m256d s3 = _mm256_setzero_pd();
      for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d t = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(ca + i));
        s0 = _mm256_fmadd_pd(t, _mm256_loadu_pd(c0 + i), s0);
        s1 = _mm256_fmadd_pd(t, _mm256_loadu_pd(c1 + i), s1);
        s2 = _mm256_fmadd_pd(t, _mm256_loadu_pd(c2 + i), s2);
        s3 = _mm256_fmadd_pd(t, _mm256_loadu_pd(c3 + i), s3);
      }
      double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
      for (std::size_t i = n4; i < n; ++i) {
        const double t = w[i] * ca[i];
        r0 += t * c0[i];
        r1 += t * c1[i];
        r2 += t * c2[i];
        r3 += t * c3[i];
      }
      const double r[4] = {r0, r1, r2, r3};
      for (std::size_t j = 0; j < 4; ++j) {
        out[a * k + b + j] = r[j];
        out[(b + j) * k + a] = r[j];
      }
    }
    for (; b < k; ++b) {
      const double v = weighted_dot_avx2(w, ca, cols[b], n);
      out[a * k + b] = v;
      out[b * k + a] = v;
    }
  }
}

constexpr KernelTable kAvx2Table{Backend::Avx2, dot_avx2, weighted_dot_avx2, axpy_avx2,
                                 weighted_gram_avx2};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2Table; }

}  // namespace glmebic::kernels::detail
