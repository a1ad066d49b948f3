#include "glmebic/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "glmebic/config.hpp"
#include "glmebic/error.hpp"
#include "glmebic/experiments.hpp"
#include "glmebic/kernels.hpp"
#include "glmebic/parallel.hpp"

namespace glmebic {
namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgs:
    case ErrorCode::UnsupportedPair:
    case ErrorCode::InvalidRho:
    case ErrorCode::InvalidDesign:
      return kExitUsage;
    case ErrorCode::DataError:
    case ErrorCode::EmptyCandidates:
    case ErrorCode::FoldTooSmall:
      return kExitData;
    default:
      return kExitNumerical;
  }
}

class Outputs {
 public:
  Outputs(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {
    if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);
  }

  void table(const std::string& name, const std::string& content, bool echo = true) {
    if (echo) {
      out_ << "# " << name << '\n' << content;
    }
    if (cfg_.output_dir.empty()) return;
    const fs::path path = fs::path(cfg_.output_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::DataError, fmt::format("cannot write {}", path.string()));
    f << content;
    written_.push_back(name);
  }

  void manifest() {
    if (cfg_.output_dir.empty()) return;
    nlohmann::json j = to_json(cfg_);
    j["kernelBackend"] = std::string(kernels::to_string(kernels::active().backend));
    j["outputs"] = written_;
    std::ofstream f(fs::path(cfg_.output_dir) / "manifest.json", std::ios::binary);
    f << j.dump(2) << '\n';
  }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
  std::vector<std::string> written_;
};

LinkFamily link_family(const RunConfig& cfg, const std::string& link) {
  const Family fam = cfg.family == "gamma" ? Family::gamma(cfg.shape) : Family::parse(cfg.family);
  return compose_link_family(fam, Link::parse(link));
}

Dataset load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw Error(ErrorCode::InvalidArgs, "--input is required");
  return read_csv(cfg.input);
}

std::string feature_label(const Dataset& data, std::size_t j) {
  if (!data.feature_names().empty()) return data.feature_names()[j];
  return fmt::format("x{}", j + 1);
}

std::vector<std::size_t> zero_based(const std::vector<std::size_t>& one_based, std::size_t p) {
  std::vector<std::size_t> out;
  for (std::size_t f : one_based) {
    if (f < 1 || f > p) {
      throw Error(ErrorCode::InvalidArgs, fmt::format("feature {} is outside 1..{}", f, p));
    }
    out.push_back(f - 1);
  }
  return out;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const LinkFamily lf = link_family(cfg, cfg.link);
  const Dataset data = load_input(cfg);
  data.validate_response(lf.family());
  const ModelIndex model(zero_based(cfg.features, data.p()));
  const FitResult fit = fit_mle(lf, data, model, cfg.fit);
  const double gamma = GammaSpec::parse(cfg.gammas_or({"bic"}).front()).resolve(data.n(), data.p());
  const ModelScore sc = ebic_score(fit, model, data.n(), data.p(), gamma);

  std::ostringstream coef;
  coef << "term\tfeature\testimate\n";
  coef << fmt::format("(intercept)\t0\t{}\n", fit.beta[0]);
  for (std::size_t k = 0; k < model.size(); ++k) {
    coef << fmt::format("{}\t{}\t{}\n", feature_label(data, model.indices[k]), model.indices[k] + 1,
                        fit.beta[static_cast<long>(k) + 1]);
  }
  std::ostringstream summary;
  summary << "key\tvalue\n";
  summary << fmt::format("model\t{}\n", lf.name());
  summary << fmt::format("n\t{}\np\t{}\nsize\t{}\n", data.n(), data.p(), model.size());
  summary << fmt::format("loglik\t{}\n", fit.loglik);
  summary << fmt::format("gamma\t{}\nebic\t{}\n", gamma, sc.ebic);
  summary << fmt::format("status\t{}\niterations\t{}\n", to_string(fit.status), fit.iterations);
  summary << fmt::format("fisher_fallback\t{}\n", fit.used_fisher_fallback ? 1 : 0);

  Outputs o(cfg, out);
  o.table("coefficients.tsv", coef.str());
  o.table("fit.tsv", summary.str());
  o.manifest();
  if (!fit.usable()) {
    err << fmt::format("error: fit stopped with status {}\n", to_string(fit.status));
    return kExitNumerical;
  }
  if (fit.separated()) err << "warning: coefficients hit the cap (quasi-separation)\n";
  return kExitOk;
}

int cmd_select(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const LinkFamily lf = link_family(cfg, cfg.link);
  const Dataset data = load_input(cfg);
  data.validate_response(lf.family());
  SelectConfig sc = cfg.select_config({"gamma1", "gamma2", "gamma3", "gamma4"});
  sc.threads = cfg.threads.value_or(1);
  const SelectionReport rep = select_pipeline(lf, data, sc);

  std::ostringstream path;
  path << "path\tstep\tfeature\tname\tloglik";
  for (const auto& label : rep.gamma_labels) path << "\tebic_" << label;
  path << '\n';
  for (std::size_t pi = 0; pi < rep.paths.size(); ++pi) {
    const SelectionPath& sp = rep.paths[pi];
    const std::string& builder = rep.gamma_labels[rep.paths.size() == 1 ? 0 : pi];
    path << fmt::format("{}\t0\t0\t(intercept)\t{}", builder, sp.null_fit.loglik);
    for (const auto& s : sp.null_scores) path << '\t' << fmt::format("{}", s.ebic);
    path << '\n';
    for (std::size_t s = 0; s < sp.steps.size(); ++s) {
      const PathStep& st = sp.steps[s];
      path << fmt::format("{}\t{}\t{}\t{}\t{}", builder, s + 1, st.feature + 1,
                          feature_label(data, st.feature), st.fit.loglik);
      for (const auto& sc2 : st.scores) path << '\t' << fmt::format("{}", sc2.ebic);
      path << '\n';
    }
  }

  std::ostringstream sel;
  sel << "gamma\tgamma_value\tsize\tfeatures\tnames\tloglik\tebic\n";
  for (std::size_t g = 0; g < rep.gammas.size(); ++g) {
    std::string names;
    for (std::size_t k = 0; k < rep.final_order[g].size(); ++k) {
      if (k) names += ',';
      names += feature_label(data, rep.final_order[g][k]);
    }
    sel << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", rep.gamma_labels[g], rep.gammas[g],
                       rep.final_order[g].size(), one_based_list(rep.final_order[g]), names,
                       rep.final_scores[g].loglik, rep.final_scores[g].ebic);
  }

  Outputs o(cfg, out);
  o.table("path.tsv", path.str());
  o.table("selected.tsv", sel.str());
  if (rep.screened) {
    std::ostringstream scr;
    scr << "rank\tfeature\tname\tstatistic\n";
    for (std::size_t r = 0; r < rep.screen.keep.size(); ++r) {
      const std::size_t j = rep.screen.keep[r];
      scr << fmt::format("{}\t{}\t{}\t{}\n", r + 1, j + 1, feature_label(data, j), rep.screen.statistics[j]);
    }
    o.table("screening.tsv", scr.str(), false);
  }
  o.manifest();
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Setting setting = parse_setting(std::to_string(cfg.setting));
  if (cfg.reps < 1) throw Error(ErrorCode::InvalidArgs, "--reps must be at least 1");
  const SelectConfig sc = cfg.select_config({"gamma1", "gamma2", "gamma3", "gamma4"});
  std::vector<ExperimentSummary> summaries;
  nlohmann::json designs = nlohmann::json::array();
  Outputs o(cfg, out);
  for (std::size_t n : cfg.ns) {
    for (double rho : cfg.rhos) {
      SimDesign d = design_for(setting, n, rho);
      d.mixture_variance = cfg.mixture_variance;
      d.validate();
      designs.push_back({{"setting", setting_number(d.setting)}, {"n", d.n}, {"pn", d.pn},
                         {"p0n", d.p0n}, {"rho", d.rho}, {"L", d.L}, {"q", d.q},
                         {"mixtureVariance", d.mixture_variance}});
      summaries.push_back(run_simulation_batch(d, cfg.reps, sc, cfg.seed, cfg.threads.value_or(1)));
      for (const auto& c : summaries.back().cells) {
        if (c.n_failed > 0) {
          err << fmt::format("warning: n={} rho={} {}: {} of {} replicates failed\n", c.n, c.rho,
                             c.gamma_label, c.n_failed, c.n_failed + c.n_reps);
          break;
        }
      }
      if (cfg.dump_replicates && !cfg.output_dir.empty()) {
        for (std::size_t r = 0; r < cfg.reps; ++r) {
          const SimReplicate rep = generate_replicate(d, cfg.seed, r);
          write_csv(rep.dataset, fs::path(cfg.output_dir) /
                                     fmt::format("replicate_s{}_rho{}_n{}_{}.csv",
                                                 setting_number(d.setting), rho, n, r + 1));
        }
      }
    }
  }
  std::ostringstream summary, reps;
  write_summary_tsv(summary, summaries);
  write_replicates_tsv(reps, summaries);
  o.table("summary.tsv", summary.str());
  o.table("replicates.tsv", reps.str(), false);
  o.table("design.json", designs.dump(2) + "\n", false);
  o.manifest();
  return kExitOk;
}

int cmd_cv_links(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const Dataset data = load_input(cfg);
  std::vector<LinkFamily> links;
  for (const auto& l : cfg.links) links.push_back(link_family(cfg, l));
  for (const auto& lf : links) data.validate_response(lf.family());

  CvOptions cv;
  cv.folds = cfg.folds;
  cv.path_length = cfg.cv_path_length;
  cv.seed = cfg.seed;
  cv.gamma = GammaSpec::parse(cfg.gammas_or({"paper-final"}).front());
  cv.screen_threshold = cfg.screen_threshold;
  cv.screen_keep = cfg.screen_keep;
  cv.fit = cfg.fit;
  cv.threads = cfg.threads.value_or(1);

  Outputs o(cfg, out);
  std::ostringstream cv_tab;
  if (cfg.full) {
    WorkflowOptions w;
    w.path_length = cfg.path_length;
    w.cv = cv;
    const FinalReport rep = real_data_workflow(data, links, w);
    std::ostringstream paths, final_tab;
    write_paths_tsv(paths, rep, data);
    write_final_tsv(final_tab, rep, data);
    write_cv_tsv(cv_tab, rep.cv);
    o.table("paths.tsv", paths.str(), false);
    o.table("cv.tsv", cv_tab.str());
    o.table("final.tsv", final_tab.str());
  } else {
    write_cv_tsv(cv_tab, cv_select_link(data, links, cv));
    o.table("cv.tsv", cv_tab.str());
  }
  o.manifest();
  return kExitOk;
}

std::vector<double> read_beta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::DataError, fmt::format("cannot open beta file {}", path));
  std::vector<double> beta;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    try {
      std::size_t used = 0;
      beta.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      throw Error(ErrorCode::DataError, fmt::format("{}: line {} is not a number", path, lineno));
    }
  }
  return beta;
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  Dataset data;
  std::vector<double> beta;
  std::string source;
  std::string link = cfg.link;
  if (!cfg.input.empty()) {
    if (cfg.beta_file.empty()) throw Error(ErrorCode::InvalidArgs, "--beta-file is required with --input");
    data = load_input(cfg);
    beta = read_beta_file(cfg.beta_file);
    source = cfg.input;
  } else {
    const SimDesign d = design_for(parse_setting(std::to_string(cfg.setting)), cfg.ns.front(),
                                   cfg.rhos.front());
    SimDesign dd = d;
    dd.mixture_variance = cfg.mixture_variance;
    const SimReplicate rep = generate_replicate(dd, cfg.seed, 0);
    data = rep.dataset;
    beta = rep.truth.dense(d.pn);
    source = fmt::format("setting {} n={} rho={}", cfg.setting, d.n, d.rho);
  }
  const LinkFamily lf = link_family(cfg, link);
  data.validate_response(lf.family());
  const Eigen::VectorXd b0 = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<long>(beta.size()));
  const C6Report r = c6_diagnostics(lf, data, b0);

  std::ostringstream tab;
  tab << "key\tvalue\n";
  tab << fmt::format("source\t{}\nmodel\t{}\nn\t{}\n", source, lf.name(), r.n);
  tab << fmt::format("threshold\t{}\n", r.threshold);
  tab << fmt::format("score_ratio\t{}\n", r.score_ratio);
  tab << fmt::format("score_ratio_feature\t{}\n", r.score_ratio_feature + 1);
  tab << fmt::format("score_ratio_row\t{}\n", r.score_ratio_row + 1);
  tab << fmt::format("score_ratio_below_threshold\t{}\n", r.score_ratio_below_threshold() ? 1 : 0);
  tab << fmt::format("zero_columns\t{}\n", r.zero_columns);
  if (r.curvature_ratio) {
    tab << fmt::format("curvature_ratio\t{}\n", *r.curvature_ratio);
    tab << fmt::format("curvature_ratio_below_threshold\t{}\n", *r.curvature_ratio_below_threshold() ? 1 : 0);
  } else {
    tab << "curvature_ratio\tNA\ncurvature_ratio_below_threshold\tNA\n";
  }
  tab << fmt::format("max_abs_x\t{}\n", r.max_abs_x);
  tab << fmt::format("max_abs_h_prime\t{}\n", r.max_abs_h_prime);
  tab << fmt::format("max_abs_h_double_prime\t{}\n", r.max_abs_h_double_prime);
  tab << fmt::format("min_variance\t{}\nmax_variance\t{}\n", r.min_variance, r.max_variance);

  Outputs o(cfg, out);
  o.table("diagnose.tsv", tab.str());
  o.manifest();
  return kExitOk;
}

struct Flags {
  std::string config_path;
  std::size_t threads = 0;
  std::size_t max_steps = 0;
  std::string output_dir;
};

void add_data_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--input", cfg.input, "CSV file with header; first column y");
  sub->add_option("--family", cfg.family, "bernoulli, poisson or gamma");
  sub->add_option("--shape", cfg.shape, "gamma shape parameter");
  sub->add_option("--fit-tol", cfg.fit.tol, "score sup-norm tolerance");
  sub->add_option("--max-iter", cfg.fit.max_iterations, "Newton iteration limit");
  sub->add_option("--beta-cap", cfg.fit.beta_cap, "coefficient cap flagging separation");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  Flags flags;

  CLI::App app{"GLM feature selection with the extended BIC", "glmebic"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  auto* config_opt = app.add_option("--config", flags.config_path, "JSON config or run manifest; its keys override flags");
  auto* threads_opt = app.add_option("--threads", flags.threads, "worker threads (overrides GLMEBIC_THREADS)")
                          ->check(CLI::PositiveNumber);
  auto* outdir_opt = app.add_option("--output-dir", flags.output_dir, "directory for tables and manifest");
  app.add_option("--seed", cfg.seed, "master seed");

  auto* fit = app.add_subcommand("fit", "fit one model and report coefficients, log-likelihood and EBIC");
  add_data_options(fit, cfg);
  fit->add_option("--link", cfg.link, "link name");
  fit->add_option("--features", cfg.features, "1-based feature ids")->delimiter(',');
  fit->add_option("--gamma", cfg.gammas, "EBIC gamma (number or preset)")->delimiter(',');

  auto* sel = app.add_subcommand("select", "screening + forward selection + EBIC read-out");
  add_data_options(sel, cfg);
  sel->add_option("--link", cfg.link, "link name");
  sel->add_option("--gamma", cfg.gammas, "gammas (numbers or presets); the first builds the path")->delimiter(',');
  auto* max_steps_opt = sel->add_option("--max-steps", flags.max_steps, "forward steps");
  sel->add_option("--screen-threshold", cfg.screen_threshold, "screen when p exceeds this");
  sel->add_option("--screen-keep", cfg.screen_keep, "features kept by screening");
  sel->add_flag("--path-per-gamma", cfg.path_per_gamma, "build a separate path for each gamma");
  sel->add_option("--readout", cfg.readout, "prefix-min or first-increase");

  auto* sim = app.add_subcommand("simulate", "PDR/FDR over simulated replicates");
  sim->add_option("--setting", cfg.setting, "simulation setting 1, 2 or 3");
  sim->add_option("--rho", cfg.rhos, "compound-symmetry correlation(s)")->delimiter(',');
  sim->add_option("--n", cfg.ns, "sample size(s)")->delimiter(',');
  sim->add_option("--reps", cfg.reps, "replicates per cell");
  sim->add_option("--gamma", cfg.gammas, "gammas to report")->delimiter(',');
  sim->add_option("--k-multiplier", cfg.k_multiplier, "step limit is ceil(k * p0n)");
  auto* sim_steps_opt = sim->add_option("--max-steps", flags.max_steps, "forward steps");
  sim->add_option("--mixture-variance", cfg.mixture_variance, "variance of the N(1, v) component");
  sim->add_flag("--path-per-gamma", cfg.path_per_gamma, "build a separate path for each gamma");
  sim->add_option("--readout", cfg.readout, "prefix-min or first-increase");
  sim->add_flag("--dump-replicates", cfg.dump_replicates, "write each replicate as CSV");

  auto* cv = app.add_subcommand("cv-links", "choose a link by k-fold cross-validation");
  add_data_options(cv, cfg);
  cv->add_option("--links", cfg.links, "links to compare")->delimiter(',');
  cv->add_option("--folds", cfg.folds, "number of folds");
  cv->add_option("--cv-path-length", cfg.cv_path_length, "forward steps inside each fold");
  cv->add_option("--path-length", cfg.path_length, "forward steps of the full-data paths (--full)");
  cv->add_option("--gamma", cfg.gammas, "gamma for the final selection")->delimiter(',');
  cv->add_option("--screen-threshold", cfg.screen_threshold, "screen when p exceeds this");
  cv->add_option("--screen-keep", cfg.screen_keep, "features kept by screening");
  cv->add_flag("--full", cfg.full, "also run per-link paths and final selection");

  auto* diag = app.add_subcommand("diagnose", "boundedness ratios at a coefficient vector");
  add_data_options(diag, cfg);
  diag->add_option("--link", cfg.link, "link name");
  diag->add_option("--beta-file", cfg.beta_file, "coefficients, one per line, length p");
  diag->add_option("--setting", cfg.setting, "simulation setting when no --input is given");
  diag->add_option("--n", cfg.ns, "sample size for the simulated design")->delimiter(',');
  diag->add_option("--rho", cfg.rhos, "correlation for the simulated design")->delimiter(',');

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("glmebic");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    for (auto* sub : {fit, sel, sim, cv, diag}) {
      if (sub->parsed()) cfg.command = sub->get_name();
    }
    if (max_steps_opt->count() > 0 || sim_steps_opt->count() > 0) cfg.max_steps = flags.max_steps;
    if (config_opt->count() > 0) apply_json(cfg, load_json_file(flags.config_path));
    if (outdir_opt->count() > 0) cfg.output_dir = flags.output_dir;
    if (threads_opt->count() > 0) {
      cfg.threads = flags.threads;
    } else if (!cfg.threads) {
      cfg.threads = default_thread_count();
    }
    if (cfg.command.empty()) {
      err << app.help();
      return kExitUsage;
    }

    if (cfg.command == "fit") return cmd_fit(cfg, out, err);
    if (cfg.command == "select") return cmd_select(cfg, out, err);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
    if (cfg.command == "cv-links") return cmd_cv_links(cfg, out, err);
    if (cfg.command == "diagnose") return cmd_diagnose(cfg, out, err);
    err << fmt::format("error: unknown command '{}'\n", cfg.command);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace glmebic
