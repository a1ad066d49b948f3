#include "glmebic/simgen.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

#include "glmebic/error.hpp"

namespace glmebic {

Setting parse_setting(std::string_view text) {
  if (text == "1" || text == "S1" || text == "s1") return Setting::S1;
  if (text == "2" || text == "S2" || text == "s2") return Setting::S2;
  if (text == "3" || text == "S3" || text == "s3") return Setting::S3;
  throw Error(ErrorCode::InvalidArgs, fmt::format("unknown setting '{}' (expected 1, 2 or 3)", text));
}

int setting_number(Setting s) noexcept { return static_cast<int>(s); }

std::size_t divergent_pn(std::size_t n) {
  return static_cast<std::size_t>(std::floor(40.0 * std::exp(std::pow(static_cast<double>(n), 0.2))));
}

std::size_t divergent_p0n(std::size_t n) {
  return static_cast<std::size_t>(std::floor(5.0 * std::pow(static_cast<double>(n), 0.1)));
}

void SimDesign::validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::InvalidRho, fmt::format("rho must lie in [0, 1) (got {})", rho));
  }
  if (n < 2) throw Error(ErrorCode::InvalidDesign, "n must be at least 2");
  if (p0n < 1 || L < 1) throw Error(ErrorCode::InvalidDesign, "p0n and L must be positive");
  if (!(mixture_variance > 0.0)) throw Error(ErrorCode::InvalidDesign, "mixture variance must be positive");
  if (q > pn) throw Error(ErrorCode::InvalidDesign, fmt::format("q={} exceeds pn={}", q, pn));
  if (setting == Setting::S3) {
    if (p0n > 25) {
      throw Error(ErrorCode::InvalidDesign, fmt::format("setting 3 needs p0n <= 25 (got {})", p0n));
    }
    if (L * p0n > pn - q) {
      throw Error(ErrorCode::InvalidDesign,
                  fmt::format("setting 3 needs L*p0n <= pn - q ({} > {})", L * p0n, pn - q));
    }
  } else if (L * p0n > pn) {
    throw Error(ErrorCode::InvalidDesign, fmt::format("L*p0n={} exceeds pn={}", L * p0n, pn));
  }
}

SimDesign design_for(Setting setting, std::size_t n, double rho) {
  SimDesign d;
  d.setting = setting;
  d.n = n;
  d.pn = divergent_pn(n);
  d.p0n = divergent_p0n(n);
  d.rho = rho;
  d.L = setting == Setting::S2 ? 5 : 10;
  d.q = setting == Setting::S3 ? 50 : 15;
  d.validate();
  return d;
}

std::vector<double> TrueModel::dense(std::size_t p) const {
  std::vector<double> beta(p, 0.0);
  for (std::size_t k = 0; k < support.size(); ++k) beta.at(support[k]) = coefficients[k];
  return beta;
}

TrueModel true_model(const SimDesign& design) {
  TrueModel t;
  for (std::size_t k = 1; k <= design.p0n; ++k) {
    t.support.push_back(design.L * k - 1);
    t.coefficients.push_back(k % 2 == 1 ? 1.0 : 1.3);
  }
  return t;
}

double cloglog_probability(double eta) noexcept { return -std::expm1(-std::exp(eta)); }

std::vector<double> cloglog_response(std::span<const double> eta, Philox& rng) {
  std::vector<double> y(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    y[i] = uniform_open(rng) < cloglog_probability(eta[i]) ? 1.0 : 0.0;
  }
  return y;
}

namespace {

double laplace(Philox& rng) {
  const double u = uniform_open(rng) - 0.5;
  return u < 0.0 ? std::log1p(2.0 * u) : -std::log1p(-2.0 * u);
}

void fill_blocks_s12(const SimDesign& d, std::vector<double>& x, Philox& rng) {
  const std::size_t n = d.n;
  std::normal_distribution<double> normal(0.0, 1.0);
  // Block 1: compound symmetry through a shared factor per row.
  const double a = std::sqrt(d.rho);
  const double b = std::sqrt(1.0 - d.rho);
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = normal(rng);
    for (std::size_t j = 0; j < d.q; ++j) x[j * n + i] = a * z0 + b * normal(rng);
  }
  const std::size_t end2 = std::max(d.q, d.pn / 3);
  const std::size_t end3 = std::max(end2, 2 * d.pn / 3);
  for (std::size_t j = d.q; j < end2; ++j) {
    for (std::size_t i = 0; i < n; ++i) x[j * n + i] = normal(rng);
  }
  for (std::size_t j = end2; j < end3; ++j) {
    for (std::size_t i = 0; i < n; ++i) x[j * n + i] = laplace(rng);
  }
  const double sd2 = std::sqrt(d.mixture_variance);
  for (std::size_t j = end3; j < d.pn; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double z = normal(rng);
      x[j * n + i] = uniform_open(rng) < 0.5 ? -1.0 + z : 1.0 + sd2 * z;
    }
  }
}

void fill_s3(const SimDesign& d, std::vector<double>& x, Philox& rng) {
  const std::size_t n = d.n;
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t base = d.pn - d.q;
  for (std::size_t j = 0; j < base; ++j) {
    for (std::size_t i = 0; i < n; ++i) x[j * n + i] = normal(rng);
  }
  const double noise = std::sqrt(25.0 - static_cast<double>(d.p0n));
  for (std::size_t j = base; j < d.pn; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t t = 1; t <= d.p0n; ++t) {
        const double sign = t % 2 == 1 ? 1.0 : -1.0;
        s += sign * x[(d.L * t - 1) * n + i];
      }
      x[j * n + i] = (s + noise * normal(rng)) / 5.0;
    }
  }
}

}  // namespace

SimReplicate generate_replicate(const SimDesign& design, std::uint64_t seed,
                                std::uint64_t replicate_id) {
  design.validate();
  Philox rng(seed, replicate_id);
  std::vector<double> x(design.n * design.pn);
  if (design.setting == Setting::S3) {
    fill_s3(design, x, rng);
  } else {
    fill_blocks_s12(design, x, rng);
  }

  SimReplicate rep;
  rep.truth = true_model(design);
  rep.seed = seed;
  rep.replicate_id = replicate_id;
  std::vector<double> eta(design.n, 0.0);
  for (std::size_t k = 0; k < rep.truth.support.size(); ++k) {
    const double* col = x.data() + rep.truth.support[k] * design.n;
    const double beta = rep.truth.coefficients[k];
    for (std::size_t i = 0; i < design.n; ++i) eta[i] += beta * col[i];
  }
  std::vector<double> y = cloglog_response(eta, rng);
  rep.dataset = Dataset(std::move(y), std::move(x), design.pn);
  return rep;
}

}  // namespace glmebic
