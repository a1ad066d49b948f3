#include "glmebic/ebic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>

#include "glmebic/error.hpp"

namespace glmebic {

double log_choose(std::size_t p, std::size_t k) {
  if (k > p) throw Error(ErrorCode::InvalidArgs, fmt::format("log_choose: k={} > p={}", k, p));
  if (k == 0 || k == p) return 0.0;
  k = std::min(k, p - k);
  const double dp = static_cast<double>(p);
  const double dk = static_cast<double>(k);
  if (k <= 64) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
      acc += std::log((dp - dk + static_cast<double>(i)) / static_cast<double>(i));
    }
    return acc;
  }
  return std::lgamma(dp + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dp - dk + 1.0);
}

ModelScore ebic_score(double loglik, const ModelIndex& model, std::size_t n, std::size_t p,
                      double gamma) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidArgs, "gamma must be non-negative");
  ModelScore s;
  s.model = model;
  s.loglik = loglik;
  s.gamma = gamma;
  s.size_penalty = static_cast<double>(model.size()) * std::log(static_cast<double>(n));
  s.prior_penalty = 2.0 * gamma * log_choose(p, model.size());
  s.ebic = -2.0 * loglik + s.size_penalty + s.prior_penalty;
  return s;
}

ModelScore ebic_score(const FitResult& fit, const ModelIndex& model, std::size_t n, std::size_t p,
                      double gamma) {
  return ebic_score(fit.loglik, model, n, p, gamma);
}

double ebic_value(double loglik, std::size_t model_size, std::size_t n, std::size_t p,
                  double gamma) {
  return -2.0 * loglik + static_cast<double>(model_size) * std::log(static_cast<double>(n)) +
         2.0 * gamma * log_choose(p, model_size);
}

GammaGrid gamma_grid(std::size_t n, std::size_t p) {
  if (n <= 1 || p <= 1) {
    throw Error(ErrorCode::InvalidArgs, fmt::format("gamma grid needs n > 1 and p > 1 (n={}, p={})", n, p));
  }
  const double ratio = std::log(static_cast<double>(n)) / std::log(static_cast<double>(p));
  GammaGrid g;
  g.boundary = std::max(0.0, 1.0 - ratio / 2.0);
  g.gamma1 = 0.0;
  g.gamma2 = std::max(0.0, 0.5 * (1.0 - ratio / 2.0));
  g.gamma3 = std::max(0.0, 1.0 - ratio / 4.0);
  g.gamma4 = 1.0;
  return g;
}

double final_selection_gamma(std::size_t n, std::size_t p) {
  gamma_grid(n, p);  // argument validation
  const double ratio = std::log(static_cast<double>(n)) / std::log(static_cast<double>(p));
  return std::max(0.0, 1.0 - ratio / 3.0);
}

GammaSpec GammaSpec::parse(std::string_view text) {
  GammaSpec s;
  s.text_ = std::string(text);
  static constexpr std::string_view kPresets[] = {"bic",  "gamma1", "gamma2",      "gamma3",
                                                  "gamma4", "mbic", "paper-final", "boundary"};
  if (std::find(std::begin(kPresets), std::end(kPresets), text) != std::end(kPresets)) {
    s.preset_ = true;
    return s;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgs,
                "gamma must be a non-negative number or one of bic, gamma1..gamma4, mbic, "
                "paper-final, boundary (got '" + s.text_ + "')");
  }
  s.value_ = v;
  return s;
}

GammaSpec GammaSpec::value(double gamma) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidArgs, "gamma must be non-negative");
  GammaSpec s;
  s.text_ = fmt::format("{}", gamma);
  s.value_ = gamma;
  return s;
}

double GammaSpec::resolve(std::size_t n, std::size_t p) const {
  if (!preset_) return value_;
  if (text_ == "bic" || text_ == "gamma1") return 0.0;
  if (text_ == "mbic" || text_ == "gamma4") return 1.0;
  if (text_ == "paper-final") return final_selection_gamma(n, p);
  const GammaGrid g = gamma_grid(n, p);
  if (text_ == "gamma2") return g.gamma2;
  if (text_ == "gamma3") return g.gamma3;
  return g.boundary;
}

}  // namespace glmebic
