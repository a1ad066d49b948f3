#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "glmebic/glm_fit.hpp"

namespace glmebic {

/// ln C(p, k) through log-gamma. Throws InvalidArgs when k > p.
double log_choose(std::size_t p, std::size_t k);

/// EBIC_gamma(s) = -2 loglik + |s| ln n + 2 gamma ln C(p, |s|), where |s|
/// counts covariates only (the intercept is never counted).
struct ModelScore {
  ModelIndex model;
  double loglik = 0.0;
  double size_penalty = 0.0;
  double prior_penalty = 0.0;
  double ebic = 0.0;
  double gamma = 0.0;
};

ModelScore ebic_score(double loglik, const ModelIndex& model, std::size_t n, std::size_t p,
                      double gamma);
ModelScore ebic_score(const FitResult& fit, const ModelIndex& model, std::size_t n, std::size_t p,
                      double gamma);
double ebic_value(double loglik, std::size_t model_size, std::size_t n, std::size_t p, double gamma);

/// gamma1 = 0 (BIC), gamma2 halfway to the consistency boundary
/// 1 - ln n / (2 ln p), gamma3 halfway from the boundary to 1, gamma4 = 1.
struct GammaGrid {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double gamma4 = 1.0;
  double boundary = 0.0;

  std::array<double, 4> values() const { return {gamma1, gamma2, gamma3, gamma4}; }
};

/// Values are clamped below at 0. Throws InvalidArgs unless n > 1 and p > 1.
GammaGrid gamma_grid(std::size_t n, std::size_t p);

/// 1 - ln n / (3 ln p), clamped at 0: slightly above the boundary.
double final_selection_gamma(std::size_t n, std::size_t p);

/// A gamma given as a number or one of the presets
/// bic, gamma1, gamma2, gamma3, gamma4, mbic, paper-final, boundary.
class GammaSpec {
 public:
  static GammaSpec parse(std::string_view text);
  static GammaSpec value(double gamma);

  double resolve(std::size_t n, std::size_t p) const;
  const std::string& text() const noexcept { return text_; }
  bool is_preset() const noexcept { return preset_; }

 private:
  std::string text_;
  double value_ = 0.0;
  bool preset_ = false;
};

}  // namespace glmebic
