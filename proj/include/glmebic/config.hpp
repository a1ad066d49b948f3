#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glmebic/experiments.hpp"
#include "glmebic/select.hpp"

namespace glmebic {

/// Everything a run needs. Serialised as the run manifest; loading a manifest
/// back with --config reproduces the run.
struct RunConfig {
  std::string command;
  std::string input;
  std::string output_dir;

  std::string family = "bernoulli";
  std::string link = "logit";
  double shape = 1.0;
  std::vector<std::string> links{"logit", "probit", "cauchit", "cloglog"};
  std::vector<std::string> gammas;  // empty: command default
  std::vector<std::size_t> features;  // 1-based
  std::uint64_t seed = 1;
  std::optional<std::size_t> threads;

  // selection
  std::optional<std::size_t> max_steps;
  std::size_t screen_threshold = 1000;
  std::size_t screen_keep = 400;
  double k_multiplier = 3.0;
  bool path_per_gamma = false;
  std::string readout = "prefix-min";

  // simulation
  int setting = 1;
  std::vector<double> rhos{0.0};
  std::vector<std::size_t> ns{100};
  std::size_t reps = 50;
  double mixture_variance = 0.5;
  bool dump_replicates = false;

  // cross-validation / real-data workflow
  std::size_t folds = 8;
  std::size_t cv_path_length = 10;
  std::size_t path_length = 50;
  bool full = false;

  // diagnose
  std::string beta_file;

  FitOptions fit;

  std::vector<std::string> gammas_or(std::vector<std::string> fallback) const {
    return gammas.empty() ? fallback : gammas;
  }
  SelectConfig select_config(std::vector<std::string> default_gammas) const;
};

/// Reproducible fields only (threads and output directory are left out).
nlohmann::json to_json(const RunConfig& config);
/// Overlays the keys present in `j` onto `config`. Throws InvalidArgs on
/// malformed values.
void apply_json(RunConfig& config, const nlohmann::json& j);
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace glmebic
