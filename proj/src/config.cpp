#include "glmebic/config.hpp"

#include <fmt/format.h>

#include <fstream>

#include "glmebic/error.hpp"

namespace glmebic {

SelectConfig RunConfig::select_config(std::vector<std::string> default_gammas) const {
  SelectConfig s;
  s.gammas.clear();
  for (const auto& g : gammas_or(std::move(default_gammas))) s.gammas.push_back(GammaSpec::parse(g));
  s.max_steps = max_steps;
  s.screen_threshold = screen_threshold;
  s.screen_keep = screen_keep;
  s.k_multiplier = k_multiplier;
  s.path_per_gamma = path_per_gamma;
  s.readout = parse_readout(readout);
  s.fit = fit;
  return s;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["input"] = c.input;
  j["family"] = c.family;
  j["link"] = c.link;
  j["shape"] = c.shape;
  j["links"] = c.links;
  j["gammas"] = c.gammas;
  j["features"] = c.features;
  j["seed"] = c.seed;
  j["maxSteps"] = c.max_steps ? nlohmann::json(*c.max_steps) : nlohmann::json(nullptr);
  j["screenThreshold"] = c.screen_threshold;
  j["screenKeep"] = c.screen_keep;
  j["kMultiplier"] = c.k_multiplier;
  j["pathPerGamma"] = c.path_per_gamma;
  j["readout"] = c.readout;
  j["setting"] = c.setting;
  j["rho"] = c.rhos;
  j["n"] = c.ns;
  j["reps"] = c.reps;
  j["mixtureVariance"] = c.mixture_variance;
  j["dumpReplicates"] = c.dump_replicates;
  j["folds"] = c.folds;
  j["cvPathLength"] = c.cv_path_length;
  j["pathLength"] = c.path_length;
  j["full"] = c.full;
  j["betaFile"] = c.beta_file;
  j["fit"] = {{"tol", c.fit.tol},
              {"maxIterations", c.fit.max_iterations},
              {"betaCap", c.fit.beta_cap},
              {"maxHalvings", c.fit.max_halvings}};
  return j;
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgs, fmt::format("config key '{}': {}", key, e.what()));
  }
}

}  // namespace

void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgs, "config must be a JSON object");
  read(j, "command", c.command);
  read(j, "input", c.input);
  read(j, "outputDir", c.output_dir);
  read(j, "family", c.family);
  read(j, "link", c.link);
  read(j, "shape", c.shape);
  read(j, "links", c.links);
  if (j.contains("gammas") && j["gammas"].is_array()) {
    c.gammas.clear();
    for (const auto& g : j["gammas"]) {
      if (g.is_number()) {
        c.gammas.push_back(fmt::format("{}", g.get<double>()));
      } else if (g.is_string()) {
        c.gammas.push_back(g.get<std::string>());
      } else {
        throw Error(ErrorCode::InvalidArgs, "config key 'gammas' must hold numbers or preset names");
      }
    }
  }
  read(j, "features", c.features);
  read(j, "seed", c.seed);
  if (j.contains("threads") && !j["threads"].is_null()) {
    std::size_t t = 0;
    read(j, "threads", t);
    c.threads = t;
  }
  if (j.contains("maxSteps")) {
    if (j["maxSteps"].is_null()) {
      c.max_steps.reset();
    } else {
      std::size_t m = 0;
      read(j, "maxSteps", m);
      c.max_steps = m;
    }
  }
  read(j, "screenThreshold", c.screen_threshold);
  read(j, "screenKeep", c.screen_keep);
  read(j, "kMultiplier", c.k_multiplier);
  read(j, "pathPerGamma", c.path_per_gamma);
  read(j, "readout", c.readout);
  read(j, "setting", c.setting);
  if (j.contains("rho")) {
    if (j["rho"].is_number()) {
      c.rhos = {j["rho"].get<double>()};
    } else {
      read(j, "rho", c.rhos);
    }
  }
  if (j.contains("n")) {
    if (j["n"].is_number()) {
      c.ns = {j["n"].get<std::size_t>()};
    } else {
      read(j, "n", c.ns);
    }
  }
  read(j, "reps", c.reps);
  read(j, "mixtureVariance", c.mixture_variance);
  read(j, "dumpReplicates", c.dump_replicates);
  read(j, "folds", c.folds);
  read(j, "cvPathLength", c.cv_path_length);
  read(j, "pathLength", c.path_length);
  read(j, "full", c.full);
  read(j, "betaFile", c.beta_file);
  if (j.contains("fit") && j["fit"].is_object()) {
    const auto& f = j["fit"];
    read(f, "tol", c.fit.tol);
    read(f, "maxIterations", c.fit.max_iterations);
    read(f, "betaCap", c.fit.beta_cap);
    read(f, "maxHalvings", c.fit.max_halvings);
  }
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgs, fmt::format("cannot open config file {}", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgs, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace glmebic
