#include "glmebic/kernels.hpp"

namespace glmebic::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void weighted_gram_scalar(const double* w, const double* const* cols, std::size_t k,
                          std::size_t n, double* out) {
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      const double v = weighted_dot_scalar(w, cols[a], cols[b], n);
      out[a * k + b] = v;
      out[b * k + a] = v;
    }
  }
}

}  // namespace glmebic::kernels::detail
