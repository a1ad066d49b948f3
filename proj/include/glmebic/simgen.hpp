#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glmebic/dataset.hpp"
#include "glmebic/glm_fit.hpp"
#include "glmebic/rng.hpp"

namespace glmebic {

enum class Setting { S1 = 1, S2 = 2, S3 = 3 };

Setting parse_setting(std::string_view text);
int setting_number(Setting s) noexcept;

struct SimDesign {
  Setting setting = Setting::S1;
  std::size_t n = 0;
  std::size_t pn = 0;
  std::size_t p0n = 0;
  double rho = 0.0;
  std::size_t L = 10;
  std::size_t q = 15;
  /// Variance of the N(1, .) mixture component in the last block.
  double mixture_variance = 0.5;

  /// Throws InvalidRho / InvalidDesign.
  void validate() const;
};

/// pn = floor(40 e^{n^0.2}), p0n = floor(5 n^0.1).
std::size_t divergent_pn(std::size_t n);
std::size_t divergent_p0n(std::size_t n);

SimDesign design_for(Setting setting, std::size_t n, double rho);

/// Support {L t : t = 1..p0n} in 1-based feature numbering (stored 0-based),
/// with coefficient 1 for odd t and 1.3 for even t.
struct TrueModel {
  std::vector<std::size_t> support;
  std::vector<double> coefficients;  // aligned with support

  ModelIndex model() const { return ModelIndex(support); }
  std::vector<double> dense(std::size_t p) const;
};

TrueModel true_model(const SimDesign& design);

struct SimReplicate {
  Dataset dataset;
  TrueModel truth;
  std::uint64_t seed = 0;
  std::uint64_t replicate_id = 0;
};

/// Pure function of (design, seed, replicate_id).
SimReplicate generate_replicate(const SimDesign& design, std::uint64_t seed,
                                std::uint64_t replicate_id = 0);

/// Independent Bernoulli draws with success probability 1 - exp(-e^eta).
std::vector<double> cloglog_response(std::span<const double> eta, Philox& rng);

double cloglog_probability(double eta) noexcept;

}  // namespace glmebic
