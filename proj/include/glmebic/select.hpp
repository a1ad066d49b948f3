#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glmebic/ebic.hpp"
#include "glmebic/glm_fit.hpp"

namespace glmebic {

/// Marginal-estimator screen: one intercept + x_j fit per feature, ranked by
/// |slope| descending with ties going to the lower index.
struct ScreenResult {
  std::vector<std::size_t> ranked_features;
  std::vector<double> statistics;  // indexed by feature; -inf marks a failed fit
  std::vector<std::size_t> keep;   // first min(d, p) of ranked_features
};

ScreenResult screen_mme(const LinkFamily& lf, const Dataset& data, std::size_t keep,
                        const FitOptions& options = {}, std::size_t threads = 1);

/// How the per-gamma model is read off the path: the prefix minimising EBIC
/// (ties to the shorter prefix), or the last prefix before EBIC first increases.
enum class Readout { PrefixMin, FirstIncrease };

Readout parse_readout(std::string_view text);
const char* to_string(Readout r) noexcept;

struct PathStep {
  std::size_t feature = 0;
  FitResult fit;
  std::vector<ModelScore> scores;  // one per gamma
};

struct SelectionPath {
  std::vector<double> gammas;
  FitResult null_fit;                  // intercept-only model (prefix length 0)
  std::vector<ModelScore> null_scores;  // one per gamma
  std::vector<PathStep> steps;
  /// For each gamma, the prefix length (0 = empty model) chosen by the read-out rule.
  std::vector<std::size_t> final_prefix;
  std::string stop_reason;

  /// Selected features of the first `length` steps, in selection order.
  std::vector<std::size_t> prefix_features(std::size_t length) const;
  ModelIndex prefix_model(std::size_t length) const;
  ModelIndex final_model(std::size_t gamma_index) const;
  double prefix_ebic(std::size_t length, std::size_t gamma_index) const;
  void apply_readout(Readout rule);
};

/// Greedy forward selection. At each step every remaining candidate is fitted
/// jointly with the current model and the one with the smallest EBIC under
/// gammas.front() is appended (ties to the lower feature index). Stops at
/// max_steps, when the model reaches n - 2 covariates, or when no candidate
/// fit converges. EBIC uses p = data.p() regardless of the candidate set.
SelectionPath forward_select(const LinkFamily& lf, const Dataset& data,
                             const std::vector<std::size_t>& candidates,
                             const std::vector<double>& gammas, std::size_t max_steps,
                             const FitOptions& options = {}, std::size_t threads = 1,
                             Readout readout = Readout::PrefixMin);

struct SelectConfig {
  std::vector<GammaSpec> gammas{GammaSpec::parse("gamma1"), GammaSpec::parse("gamma2"),
                                GammaSpec::parse("gamma3"), GammaSpec::parse("gamma4")};
  std::optional<std::size_t> max_steps;
  std::size_t screen_threshold = 1000;
  std::size_t screen_keep = 400;
  double k_multiplier = 3.0;
  bool path_per_gamma = false;
  Readout readout = Readout::PrefixMin;
  /// Size of the true model when known (simulations); drives the default
  /// step limit min(ceil(k * p0), n - 2, 50). Without it the limit is min(50, n - 2).
  std::optional<std::size_t> true_model_size;
  FitOptions fit;
  std::size_t threads = 1;

  std::size_t resolve_max_steps(std::size_t n) const;
};

struct SelectionReport {
  bool screened = false;
  ScreenResult screen;
  std::vector<std::size_t> candidates;
  std::vector<double> gammas;
  std::vector<std::string> gamma_labels;
  std::vector<SelectionPath> paths;  // one, or one per gamma with path_per_gamma
  std::vector<ModelIndex> final_models;  // per gamma
  std::vector<ModelScore> final_scores;  // per gamma
  std::vector<std::vector<std::size_t>> final_order;  // per gamma, in selection order

  const SelectionPath& path_for(std::size_t gamma_index) const {
    return paths.size() == 1 ? paths.front() : paths[gamma_index];
  }
};

/// Screening (when p > screen_threshold) followed by forward selection.
SelectionReport select_pipeline(const LinkFamily& lf, const Dataset& data,
                                const SelectConfig& config);

}  // namespace glmebic
