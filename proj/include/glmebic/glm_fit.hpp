#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "glmebic/dataset.hpp"
#include "glmebic/links.hpp"

namespace glmebic {

/// A candidate model: sorted, duplicate-free covariate indices plus an
/// intercept flag. Coefficient vectors over a model are laid out as
/// [intercept (if any), indices...].
struct ModelIndex {
  std::vector<std::size_t> indices;
  bool include_intercept = true;

  ModelIndex() = default;
  /// Sorts; throws InvalidArgs on duplicates.
  explicit ModelIndex(std::vector<std::size_t> idx, bool intercept = true);

  std::size_t size() const noexcept { return indices.size(); }
  std::size_t parameter_count() const noexcept { return indices.size() + (include_intercept ? 1 : 0); }
  bool operator==(const ModelIndex&) const = default;
};

struct FitOptions {
  double tol = 1e-8;          // sup-norm of the score
  int max_iterations = 100;
  double beta_cap = 30.0;     // |beta|_inf above this flags quasi-separation
  int max_halvings = 30;
};

enum class FitStatus { Converged, MaxIterations, Separated, StepFailure };

const char* to_string(FitStatus status) noexcept;

struct FitResult {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  bool used_fisher_fallback = false;
  FitStatus status = FitStatus::StepFailure;
  /// Log-likelihood after each accepted step, starting point first.
  std::vector<double> loglik_trace;

  bool separated() const noexcept { return status == FitStatus::Separated; }
  /// Converged, or stopped at the coefficient cap with a finite likelihood.
  bool usable() const noexcept { return converged || separated(); }
};

/// H = H1 - H0 is the negative Hessian of the log-likelihood.
struct HessianParts {
  Eigen::MatrixXd h1;  // sum b''(h) h'^2 x x^T
  Eigen::MatrixXd h0;  // sum (y - mu) h'' x x^T
};

double log_likelihood(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                      const Eigen::VectorXd& beta);
Eigen::VectorXd score(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                      const Eigen::VectorXd& beta);
HessianParts hessian_parts(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                           const Eigen::VectorXd& beta);

/// Damped Newton on H1 - H0 with Fisher-scoring fallback and step halving.
/// Throws RankDeficient when the model columns (with intercept) are not of
/// full column rank, and InvalidArgs when the model has n or more parameters.
FitResult fit_mle(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                  const FitOptions& options = {});

/// Same fit with the covariate columns in caller-chosen order, optionally
/// warm-started. Coefficients follow [intercept, columns...] in that order.
FitResult fit_columns(const LinkFamily& lf, const Dataset& data,
                      std::span<const std::size_t> columns, bool intercept,
                      const FitOptions& options, const Eigen::VectorXd* start = nullptr);

/// Boundedness and ratio statistics evaluated at a full-length beta0 (no intercept).
struct C6Report {
  std::size_t n = 0;
  double threshold = 0.0;  // n^{-1/3}
  double score_ratio = 0.0;  // max_{i,j} x_ij^2 h'_i^2 / sum_i s_i^2 x_ij^2 h'_i^2
  std::size_t score_ratio_feature = 0;
  std::size_t score_ratio_row = 0;
  std::size_t zero_columns = 0;  // columns skipped because their denominator is 0
  /// max_i h''_i^2 / sum_i s_i^2 h''_i^2; empty when the denominator is 0
  /// (h'' vanishes identically, e.g. canonical links).
  std::optional<double> curvature_ratio;
  double max_abs_x = 0.0;
  double max_abs_h_prime = 0.0;
  double max_abs_h_double_prime = 0.0;
  double min_variance = 0.0;
  double max_variance = 0.0;

  bool score_ratio_below_threshold() const noexcept { return score_ratio < threshold; }
  std::optional<bool> curvature_ratio_below_threshold() const noexcept {
    if (!curvature_ratio) return std::nullopt;
    return *curvature_ratio < threshold;
  }
};

C6Report c6_diagnostics(const LinkFamily& lf, const Dataset& data, const Eigen::VectorXd& beta0);

}  // namespace glmebic
