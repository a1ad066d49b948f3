#include "glmebic/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glmebic/error.hpp"
#include "glmebic/parallel.hpp"

namespace glmebic {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_constant(std::span<const double> col) {
  return std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); });
}

std::vector<ModelScore> score_all(double loglik, const ModelIndex& model, std::size_t n,
                                  std::size_t p, const std::vector<double>& gammas) {
  std::vector<ModelScore> out;
  out.reserve(gammas.size());
  for (double g : gammas) out.push_back(ebic_score(loglik, model, n, p, g));
  return out;
}

}  // namespace

ScreenResult screen_mme(const LinkFamily& lf, const Dataset& data, std::size_t keep,
                        const FitOptions& options, std::size_t threads) {
  if (keep < 1) throw Error(ErrorCode::InvalidArgs, "screening must keep at least one feature");
  ScreenResult res;
  res.statistics.assign(data.p(), kNegInf);
  parallel_for(data.p(), threads, [&](std::size_t j) {
    if (is_constant(data.column(j))) {
      res.statistics[j] = 0.0;
      return;
    }
    try {
      const std::size_t col[1] = {j};
      const FitResult fit = fit_columns(lf, data, col, true, options);
      if (fit.usable() && std::isfinite(fit.beta[1])) res.statistics[j] = std::abs(fit.beta[1]);
    } catch (const Error&) {
      // ranked last
    }
  });
  res.ranked_features.resize(data.p());
  std::iota(res.ranked_features.begin(), res.ranked_features.end(), std::size_t{0});
  std::stable_sort(res.ranked_features.begin(), res.ranked_features.end(),
                   [&](std::size_t a, std::size_t b) { return res.statistics[a] > res.statistics[b]; });
  const std::size_t d = std::min(keep, data.p());
  res.keep.assign(res.ranked_features.begin(), res.ranked_features.begin() + static_cast<long>(d));
  return res;
}

Readout parse_readout(std::string_view text) {
  if (text == "prefix-min") return Readout::PrefixMin;
  if (text == "first-increase") return Readout::FirstIncrease;
  throw Error(ErrorCode::InvalidArgs,
              "readout must be prefix-min or first-increase (got '" + std::string(text) + "')");
}

const char* to_string(Readout r) noexcept {
  return r == Readout::PrefixMin ? "prefix-min" : "first-increase";
}

void SelectionPath::apply_readout(Readout rule) {
  final_prefix.assign(gammas.size(), 0);
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    double best = prefix_ebic(0, g);
    for (std::size_t len = 1; len <= steps.size(); ++len) {
      const double e = prefix_ebic(len, g);
      if (e < best) {
        best = e;
        final_prefix[g] = len;
      } else if (rule == Readout::FirstIncrease) {
        break;
      }
    }
  }
}

std::vector<std::size_t> SelectionPath::prefix_features(std::size_t length) const {
  std::vector<std::size_t> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length && i < steps.size(); ++i) out.push_back(steps[i].feature);
  return out;
}

ModelIndex SelectionPath::prefix_model(std::size_t length) const {
  return ModelIndex(prefix_features(length));
}

ModelIndex SelectionPath::final_model(std::size_t gamma_index) const {
  return prefix_model(final_prefix.at(gamma_index));
}

double SelectionPath::prefix_ebic(std::size_t length, std::size_t gamma_index) const {
  if (length == 0) return null_scores.at(gamma_index).ebic;
  return steps.at(length - 1).scores.at(gamma_index).ebic;
}

SelectionPath forward_select(const LinkFamily& lf, const Dataset& data,
                             const std::vector<std::size_t>& candidates,
                             const std::vector<double>& gammas, std::size_t max_steps,
                             const FitOptions& options, std::size_t threads, Readout readout) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidate features");
  if (gammas.empty()) throw Error(ErrorCode::InvalidArgs, "at least one gamma is required");
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgs, "max_steps must be at least 1");
  for (auto c : candidates) {
    if (c >= data.p()) throw Error(ErrorCode::InvalidArgs, "candidate index out of range");
  }

  const std::size_t n = data.n();
  const std::size_t p = data.p();
  SelectionPath path;
  path.gammas = gammas;
  path.null_fit = fit_columns(lf, data, {}, true, options);
  path.null_scores = score_all(path.null_fit.loglik, ModelIndex{}, n, p, gammas);

  std::vector<std::size_t> remaining = candidates;
  std::sort(remaining.begin(), remaining.end());
  remaining.erase(std::unique(remaining.begin(), remaining.end()), remaining.end());

  std::vector<std::size_t> current;
  Eigen::VectorXd current_beta = path.null_fit.beta;
  path.stop_reason = "max-steps";

  while (path.steps.size() < max_steps) {
    if (remaining.empty()) {
      path.stop_reason = "candidates-exhausted";
      break;
    }
    if (current.size() + 2 >= n) {
      path.stop_reason = "model-size-limit";
      break;
    }

    std::vector<std::optional<FitResult>> fits(remaining.size());
    Eigen::VectorXd start(current_beta.size() + 1);
    start.head(current_beta.size()) = current_beta;
    start[current_beta.size()] = 0.0;
    parallel_for(remaining.size(), threads, [&](std::size_t k) {
      std::vector<std::size_t> cols = current;
      cols.push_back(remaining[k]);
      try {
        FitResult fit = fit_columns(lf, data, cols, true, options, &start);
        if (fit.usable() && std::isfinite(fit.loglik)) fits[k] = std::move(fit);
      } catch (const Error&) {
        // rank-deficient or inadmissible candidate: skipped
      }
    });

    // Same |s| for every candidate, so argmin EBIC == argmax loglik; the EBIC
    // is still what gets compared. `remaining` is sorted, so strict < keeps
    // the lower index on ties.
    const std::size_t next_size = current.size() + 1;
    std::optional<std::size_t> best;
    double best_ebic = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      if (!fits[k]) continue;
      const double e = ebic_value(fits[k]->loglik, next_size, n, p, gammas.front());
      if (e < best_ebic) {
        best_ebic = e;
        best = k;
      }
    }
    if (!best) {
      if (path.steps.empty()) throw Error(ErrorCode::PathEmpty, "no candidate fit converged at step 1");
      path.stop_reason = "no-converged-candidate";
      break;
    }

    PathStep step;
    step.feature = remaining[*best];
    step.fit = std::move(*fits[*best]);
    current.push_back(step.feature);
    current_beta = step.fit.beta;
    step.scores = score_all(step.fit.loglik, ModelIndex(current), n, p, gammas);
    path.steps.push_back(std::move(step));
    remaining.erase(remaining.begin() + static_cast<long>(*best));
  }

  path.apply_readout(readout);
  return path;
}

std::size_t SelectConfig::resolve_max_steps(std::size_t n) const {
  const std::size_t size_limit = n >= 2 ? n - 2 : 0;
  if (max_steps) return std::min(*max_steps, size_limit);
  std::size_t limit = 50;
  if (true_model_size) {
    const auto k_steps =
        static_cast<std::size_t>(std::ceil(k_multiplier * static_cast<double>(*true_model_size)));
    limit = std::min(limit, k_steps);
  }
  return std::min(limit, size_limit);
}

SelectionReport select_pipeline(const LinkFamily& lf, const Dataset& data,
                                const SelectConfig& config) {
  if (config.gammas.empty()) throw Error(ErrorCode::InvalidArgs, "no gamma values configured");
  SelectionReport rep;
  for (const auto& g : config.gammas) {
    rep.gammas.push_back(g.resolve(data.n(), data.p()));
    rep.gamma_labels.push_back(g.text());
  }

  if (data.p() > config.screen_threshold) {
    rep.screened = true;
    rep.screen = screen_mme(lf, data, config.screen_keep, config.fit, config.threads);
    rep.candidates = rep.screen.keep;
  } else {
    rep.candidates.resize(data.p());
    std::iota(rep.candidates.begin(), rep.candidates.end(), std::size_t{0});
  }

  const std::size_t max_steps = config.resolve_max_steps(data.n());
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgs, "too few observations for selection");

  if (config.path_per_gamma && rep.gammas.size() > 1) {
    for (std::size_t g = 0; g < rep.gammas.size(); ++g) {
      std::vector<double> order = rep.gammas;
      std::rotate(order.begin(), order.begin() + static_cast<long>(g), order.begin() + static_cast<long>(g) + 1);
      SelectionPath path = forward_select(lf, data, rep.candidates, order, max_steps, config.fit,
                                          config.threads, config.readout);
      // Put the scores back in configured gamma order.
      std::vector<std::size_t> perm(order.size());
      for (std::size_t k = 0; k < order.size(); ++k) {
        perm[k] = k == 0 ? g : (k <= g ? k - 1 : k);
      }
      auto reorder = [&](auto& v) {
        auto copy = v;
        for (std::size_t k = 0; k < perm.size(); ++k) v[perm[k]] = copy[k];
      };
      reorder(path.gammas);
      reorder(path.null_scores);
      reorder(path.final_prefix);
      for (auto& s : path.steps) reorder(s.scores);
      rep.paths.push_back(std::move(path));
    }
  } else {
    rep.paths.push_back(
        forward_select(lf, data, rep.candidates, rep.gammas, max_steps, config.fit,
                       config.threads, config.readout));
  }

  for (std::size_t g = 0; g < rep.gammas.size(); ++g) {
    const SelectionPath& path = rep.path_for(g);
    const std::size_t len = path.final_prefix[g];
    rep.final_order.push_back(path.prefix_features(len));
    rep.final_models.push_back(path.prefix_model(len));
    rep.final_scores.push_back(len == 0 ? path.null_scores[g] : path.steps[len - 1].scores[g]);
  }
  return rep;
}

}  // namespace glmebic
