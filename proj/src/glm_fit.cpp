#include "glmebic/glm_fit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "glmebic/error.hpp"
#include "glmebic/kernels.hpp"

namespace glmebic {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A binary CDF link cannot reach this log-likelihood unless every row lies strictly on
// its own side of eta = 0, i.e. the responses are completely separated.
bool completely_separated(const LinkFamily& lf, double loglik) {
  if (lf.family().kind() != FamilyKind::Bernoulli) return false;
  switch (lf.link().kind()) {
    case LinkKind::Logit:
    case LinkKind::Probit:
    case LinkKind::Cauchit:
    case LinkKind::Cloglog: break;
    default: return false;
  }
  const double f0 = lf.mean(0.0);
  return loglik > std::max(std::log(f0), std::log1p(-f0));
}

// Column pointers of the model matrix [1, x_c1, x_c2, ...]; never copied so
// the pointer to the ones column stays valid.
class Design {
 public:
  Design(const Dataset& data, std::span<const std::size_t> columns, bool intercept)
      : n_(data.n()), ones_(data.n(), 1.0) {
    cols_.reserve(columns.size() + 1);
    if (intercept) cols_.push_back(ones_.data());
    for (auto c : columns) {
      if (c >= data.p()) {
        throw Error(ErrorCode::InvalidArgs, fmt::format("column index {} out of range", c));
      }
      cols_.push_back(data.column(c).data());
    }
  }
  Design(const Design&) = delete;
  Design& operator=(const Design&) = delete;

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return cols_.size(); }
  const double* col(std::size_t j) const noexcept { return cols_[j]; }
  const double* const* cols() const noexcept { return cols_.data(); }
  const double* ones() const noexcept { return ones_.data(); }

 private:
  std::size_t n_;
  std::vector<double> ones_;
  std::vector<const double*> cols_;
};

struct Point {
  Eigen::VectorXd beta;
  std::vector<double> eta;
  std::vector<double> r;
  std::vector<double> w1;
  std::vector<double> w0;
  double loglik = kNegInf;

  explicit Point(std::size_t n) : eta(n), r(n), w1(n), w0(n) {}
};

void linear_predictor(const Design& d, const Eigen::VectorXd& beta, std::vector<double>& eta) {
  const auto& kt = kernels::active();
  std::fill(eta.begin(), eta.end(), 0.0);
  for (std::size_t j = 0; j < d.k(); ++j) kt.axpy(beta[j], d.col(j), eta.data(), d.n());
}

// Fills the row terms at p.beta; loglik is -inf when any eta is inadmissible
// or the total is not finite.
void evaluate(const LinkFamily& lf, std::span<const double> y, const Design& d, Point& p) {
  linear_predictor(d, p.beta, p.eta);
  double ll = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const RowTerms t = lf.row_terms(p.eta[i], y[i]);
    ll += t.loglik;
    p.r[i] = t.score_weight;
    p.w1[i] = t.w1;
    p.w0[i] = t.w0;
  }
  p.loglik = std::isfinite(ll) ? ll : kNegInf;
}

Eigen::VectorXd score_at(const Design& d, const Point& p) {
  const auto& kt = kernels::active();
  Eigen::VectorXd g(d.k());
  for (std::size_t j = 0; j < d.k(); ++j) g[j] = kt.dot(p.r.data(), d.col(j), d.n());
  return g;
}

Eigen::MatrixXd gram(const Design& d, const double* w) {
  Eigen::MatrixXd out(d.k(), d.k());
  // Eigen is column-major but the result is symmetric.
  kernels::active().weighted_gram(w, d.cols(), d.k(), d.n(), out.data());
  return out;
}

bool full_column_rank(const Design& d) {
  if (d.k() == 0) return true;
  Eigen::MatrixXd g = gram(d, d.ones());
  Eigen::VectorXd scale(d.k());
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    if (!(g(j, j) > 0.0)) return false;
    scale[j] = 1.0 / std::sqrt(g(j, j));
  }
  const Eigen::MatrixXd c = scale.asDiagonal() * g * scale.asDiagonal();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
  if (ldlt.info() != Eigen::Success) return false;
  return ldlt.vectorD().minCoeff() > 1e-10;
}

void check_beta(const Design& d, const Eigen::VectorXd& beta) {
  if (static_cast<std::size_t>(beta.size()) != d.k()) {
    throw Error(ErrorCode::InvalidArgs,
                fmt::format("beta has length {}, model has {} parameters", beta.size(), d.k()));
  }
}

Point evaluate_checked(const LinkFamily& lf, const Dataset& data, const Design& d,
                       const Eigen::VectorXd& beta) {
  check_beta(d, beta);
  Point p(d.n());
  p.beta = beta;
  linear_predictor(d, p.beta, p.eta);
  for (std::size_t i = 0; i < d.n(); ++i) {
    if (!lf.admissible(p.eta[i])) {
      throw Error(ErrorCode::DomainError,
                  fmt::format("row {}: eta={} outside admissible range of {}", i + 1, p.eta[i],
                              lf.name()));
    }
  }
  evaluate(lf, data.y(), d, p);
  return p;
}

// Solves h x = g for symmetric h. Plain Cholesky first, then a diagonal jitter
// of 1e-10 * trace / k when the factorisation fails.
std::optional<Eigen::VectorXd> spd_solve(Eigen::MatrixXd h, const Eigen::VectorXd& g,
                                         bool allow_jitter) {
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() == Eigen::Success) return llt.solve(g);
  if (!allow_jitter) return std::nullopt;
  const double jitter = 1e-10 * std::abs(h.trace()) / static_cast<double>(h.rows());
  h.diagonal().array() += jitter;
  llt.compute(h);
  if (llt.info() == Eigen::Success) return llt.solve(g);
  return std::nullopt;
}

}  // namespace

ModelIndex::ModelIndex(std::vector<std::size_t> idx, bool intercept)
    : indices(std::move(idx)), include_intercept(intercept) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw Error(ErrorCode::InvalidArgs, "model indices contain duplicates");
  }
}

const char* to_string(FitStatus status) noexcept {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIterations: return "max-iterations";
    case FitStatus::Separated: return "separated";
    case FitStatus::StepFailure: return "step-failure";
  }
  return "unknown";
}

double log_likelihood(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                      const Eigen::VectorXd& beta) {
  const Design d(data, model.indices, model.include_intercept);
  return evaluate_checked(lf, data, d, beta).loglik;
}

Eigen::VectorXd score(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                      const Eigen::VectorXd& beta) {
  const Design d(data, model.indices, model.include_intercept);
  return score_at(d, evaluate_checked(lf, data, d, beta));
}

HessianParts hessian_parts(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                           const Eigen::VectorXd& beta) {
  const Design d(data, model.indices, model.include_intercept);
  const Point p = evaluate_checked(lf, data, d, beta);
  return HessianParts{gram(d, p.w1.data()), gram(d, p.w0.data())};
}

FitResult fit_mle(const LinkFamily& lf, const Dataset& data, const ModelIndex& model,
                  const FitOptions& options) {
  return fit_columns(lf, data, model.indices, model.include_intercept, options);
}

FitResult fit_columns(const LinkFamily& lf, const Dataset& data,
                      std::span<const std::size_t> columns, bool intercept,
                      const FitOptions& options, const Eigen::VectorXd* start) {
  const Design d(data, columns, intercept);
  const std::size_t k = d.k();
  if (k == 0) throw Error(ErrorCode::InvalidArgs, "model has no parameters");
  if (k > data.n()) {
    throw Error(ErrorCode::InvalidArgs,
                fmt::format("model has {} parameters but only {} observations", k, data.n()));
  }
  if (!full_column_rank(d)) {
    throw Error(ErrorCode::RankDeficient, "model matrix is not of full column rank");
  }

  const auto y = data.y();
  Point cur(d.n());
  Point trial(d.n());
  if (start != nullptr) {
    check_beta(d, *start);
    cur.beta = *start;
  } else {
    cur.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    if (intercept) cur.beta[0] = lf.initial_eta(data.mean_response());
  }
  evaluate(lf, y, d, cur);
  if (!std::isfinite(cur.loglik)) {
    throw Error(ErrorCode::DomainError,
                "starting point gives an inadmissible linear predictor for " + lf.name());
  }

  FitResult res;
  res.loglik_trace.push_back(cur.loglik);
  res.status = FitStatus::MaxIterations;
  Eigen::VectorXd g = score_at(d, cur);
  std::vector<double> wdiff(d.n());

  int iter = 0;
  for (;; ++iter) {
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    if (res.grad_norm < options.tol) {
      res.status = FitStatus::Converged;
      break;
    }
    if (iter >= options.max_iterations) {
      res.status = FitStatus::MaxIterations;
      break;
    }

    for (std::size_t i = 0; i < d.n(); ++i) wdiff[i] = cur.w1[i] - cur.w0[i];
    std::optional<Eigen::VectorXd> dir;
    if (lf.is_canonical()) {
      dir = spd_solve(gram(d, cur.w1.data()), g, true);
    } else {
      dir = spd_solve(gram(d, wdiff.data()), g, false);
      if (!dir) {
        res.used_fisher_fallback = true;
        dir = spd_solve(gram(d, cur.w1.data()), g, true);
      }
    }
    if (!dir || !dir->allFinite()) {
      res.status = FitStatus::StepFailure;
      break;
    }

    // Step halving; the slack only absorbs rounding in the summed likelihood.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(cur.loglik) + 1.0);
    bool accepted = false;
    double step = 1.0;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      trial.beta = cur.beta + step * (*dir);
      evaluate(lf, y, d, trial);
      if (trial.loglik >= cur.loglik - slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = FitStatus::StepFailure;
      break;
    }
    std::swap(cur, trial);
    res.loglik_trace.push_back(cur.loglik);
    g = score_at(d, cur);
    if (cur.beta.lpNorm<Eigen::Infinity>() > options.beta_cap) {
      ++iter;
      res.grad_norm = g.lpNorm<Eigen::Infinity>();
      res.status = FitStatus::Separated;
      break;
    }
  }

  if (res.status != FitStatus::Separated && completely_separated(lf, cur.loglik)) {
    res.status = FitStatus::Separated;
  }
  res.iterations = iter;
  res.converged = res.status == FitStatus::Converged;
  res.beta = std::move(cur.beta);
  res.loglik = cur.loglik;
  return res;
}

C6Report c6_diagnostics(const LinkFamily& lf, const Dataset& data, const Eigen::VectorXd& beta0) {
  if (static_cast<std::size_t>(beta0.size()) != data.p()) {
    throw Error(ErrorCode::InvalidArgs,
                fmt::format("beta0 must have length p={}, got {}", data.p(), beta0.size()));
  }
  const std::size_t n = data.n();
  std::vector<double> eta(n, 0.0);
  for (std::size_t j = 0; j < data.p(); ++j) {
    if (beta0[j] != 0.0) kernels::axpy(beta0[j], data.column(j), eta);
  }

  C6Report rep;
  rep.n = n;
  rep.threshold = std::pow(static_cast<double>(n), -1.0 / 3.0);
  std::vector<double> hp2(n);
  std::vector<double> var(n);
  double curv_num = 0.0;
  double curv_den = 0.0;
  rep.min_variance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const PointDerivatives pd = lf.derivatives(eta[i]);
    hp2[i] = pd.h_prime * pd.h_prime;
    var[i] = pd.variance;
    const double hpp2 = pd.h_double_prime * pd.h_double_prime;
    curv_num = std::max(curv_num, hpp2);
    curv_den += pd.variance * hpp2;
    rep.max_abs_h_prime = std::max(rep.max_abs_h_prime, std::abs(pd.h_prime));
    rep.max_abs_h_double_prime = std::max(rep.max_abs_h_double_prime, std::abs(pd.h_double_prime));
    rep.min_variance = std::min(rep.min_variance, pd.variance);
    rep.max_variance = std::max(rep.max_variance, pd.variance);
  }
  if (curv_den > 0.0) rep.curvature_ratio = curv_num / curv_den;

  std::vector<double> var_hp2(n);
  for (std::size_t i = 0; i < n; ++i) var_hp2[i] = var[i] * hp2[i];
  for (std::size_t j = 0; j < data.p(); ++j) {
    const auto col = data.column(j);
    double num = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      rep.max_abs_x = std::max(rep.max_abs_x, std::abs(col[i]));
      const double t = col[i] * col[i] * hp2[i];
      if (t > num) {
        num = t;
        arg = i;
      }
    }
    const double den = kernels::weighted_dot(var_hp2, col, col);
    if (!(den > 0.0)) {
      ++rep.zero_columns;
      continue;
    }
    const double ratio = num / den;
    if (ratio > rep.score_ratio) {
      rep.score_ratio = ratio;
      rep.score_ratio_feature = j;
      rep.score_ratio_row = arg;
    }
  }
  return rep;
}

}  // namespace glmebic
