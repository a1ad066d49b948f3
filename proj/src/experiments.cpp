#include "glmebic/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "glmebic/error.hpp"
#include "glmebic/parallel.hpp"

namespace glmebic {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::optional<double> sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return std::nullopt;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("NA");
}

std::string feature_label(const Dataset& data, std::size_t j) {
  if (!data.feature_names().empty()) return data.feature_names()[j];
  return fmt::format("x{}", j + 1);
}

double held_out_loglik(const LinkFamily& lf, const Dataset& data,
                       const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& features, const Eigen::VectorXd& beta) {
  double ll = 0.0;
  const auto y = data.y();
  for (std::size_t i : rows) {
    double eta = beta[0];
    for (std::size_t k = 0; k < features.size(); ++k) eta += beta[k + 1] * data.x(i, features[k]);
    ll += lf.loglik_term(eta, y[i]);
  }
  return std::isnan(ll) ? kNegInf : ll;
}

const FitResult& prefix_fit(const SelectionPath& path, std::size_t length) {
  return length == 0 ? path.null_fit : path.steps[length - 1].fit;
}

}  // namespace

PdrFdr pdr_fdr(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& truth) {
  if (truth.empty()) throw Error(ErrorCode::InvalidArgs, "true model is empty");
  std::vector<std::size_t> s = selected;
  std::vector<std::size_t> t = truth;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::vector<std::size_t> common;
  std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(common));
  PdrFdr r;
  r.pdr = static_cast<double>(common.size()) / static_cast<double>(t.size());
  r.fdr = s.empty() ? 0.0
                    : static_cast<double>(s.size() - common.size()) / static_cast<double>(s.size());
  return r;
}

PdrFdr pdr_fdr(const ModelIndex& selected, const TrueModel& truth) {
  return pdr_fdr(selected.indices, truth.support);
}

ExperimentSummary run_simulation_batch(const SimDesign& design, std::size_t replicates,
                                       SelectConfig config, std::uint64_t seed,
                                       std::size_t threads) {
  if (replicates < 1) throw Error(ErrorCode::InvalidArgs, "need at least one replicate");
  design.validate();
  if (!config.true_model_size) config.true_model_size = design.p0n;
  config.threads = 1;
  const LinkFamily lf = compose_link_family(Family::bernoulli(), Link::cloglog());

  ExperimentSummary summary;
  summary.design = design;
  summary.seed = seed;
  summary.replicates.resize(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    ReplicateOutcome& out = summary.replicates[r];
    out.replicate_id = r;
    try {
      const SimReplicate rep = generate_replicate(design, seed, r);
      const SelectionReport sel = select_pipeline(lf, rep.dataset, config);
      for (const auto& model : sel.final_models) {
        out.metrics.push_back(pdr_fdr(model, rep.truth));
        out.selected.push_back(model.indices);
      }
    } catch (const Error& e) {
      out.failed = true;
      out.error = e.what();
      out.metrics.clear();
      out.selected.clear();
    }
  });

  const std::size_t n_gamma = config.gammas.size();
  for (std::size_t g = 0; g < n_gamma; ++g) {
    CellSummary cell;
    cell.setting = setting_number(design.setting);
    cell.rho = design.rho;
    cell.n = design.n;
    cell.gamma_label = config.gammas[g].text();
    cell.gamma = config.gammas[g].resolve(design.n, design.pn);
    std::vector<double> pdr, fdr;
    for (const auto& r : summary.replicates) {
      if (r.failed) {
        ++cell.n_failed;
        continue;
      }
      pdr.push_back(r.metrics[g].pdr);
      fdr.push_back(r.metrics[g].fdr);
    }
    cell.n_reps = pdr.size();
    if (!pdr.empty()) {
      const double k = static_cast<double>(pdr.size());
      cell.mean_pdr = std::accumulate(pdr.begin(), pdr.end(), 0.0) / k;
      cell.mean_fdr = std::accumulate(fdr.begin(), fdr.end(), 0.0) / k;
      cell.se_pdr = sample_sd(pdr, cell.mean_pdr);
      cell.se_fdr = sample_sd(fdr, cell.mean_fdr);
    } else {
      cell.mean_pdr = std::numeric_limits<double>::quiet_NaN();
      cell.mean_fdr = std::numeric_limits<double>::quiet_NaN();
    }
    summary.cells.push_back(std::move(cell));
  }
  return summary;
}

void write_summary_tsv(std::ostream& out, const std::vector<ExperimentSummary>& summaries) {
  out << "setting\trho\tn\tgamma\tmean_pdr\tse_pdr\tmean_fdr\tse_fdr\tn_reps\tn_failed\n";
  for (const auto& s : summaries) {
    for (const auto& c : s.cells) {
      out << fmt::format("{}\t{}\t{}\t{}\t{:.6f}\t{}\t{:.6f}\t{}\t{}\t{}\n", c.setting, c.rho, c.n,
                         c.gamma_label, c.mean_pdr, fmt_opt(c.se_pdr), c.mean_fdr,
                         fmt_opt(c.se_fdr), c.n_reps, c.n_failed);
    }
  }
}

void write_replicates_tsv(std::ostream& out, const std::vector<ExperimentSummary>& summaries) {
  out << "setting\trho\tn\treplicate\tgamma\tpdr\tfdr\tselected\tstatus\n";
  for (const auto& s : summaries) {
    for (const auto& r : s.replicates) {
      for (std::size_t g = 0; g < s.cells.size(); ++g) {
        const std::string& label = s.cells[g].gamma_label;
        if (r.failed) {
          out << fmt::format("{}\t{}\t{}\t{}\t{}\tNA\tNA\t\tfailed: {}\n",
                             setting_number(s.design.setting), s.design.rho, s.design.n,
                             r.replicate_id, label, r.error);
        } else {
          out << fmt::format("{}\t{}\t{}\t{}\t{}\t{:.6f}\t{:.6f}\t{}\tok\n",
                             setting_number(s.design.setting), s.design.rho, s.design.n,
                             r.replicate_id, label, r.metrics[g].pdr, r.metrics[g].fdr,
                             one_based_list(r.selected[g]));
        }
      }
    }
  }
}

std::vector<std::size_t> stratified_folds(std::span<const double> y, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgs, "need at least 2 folds");
  if (folds > y.size()) {
    throw Error(ErrorCode::FoldTooSmall,
                fmt::format("{} folds requested for {} observations", folds, y.size()));
  }
  std::map<double, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < y.size(); ++i) classes[y[i]].push_back(i);
  Philox rng(seed, 0x43560000u);
  std::vector<std::size_t> fold_of(y.size());
  std::size_t next = 0;
  for (auto& [value, rows] : classes) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i : rows) fold_of[i] = next++ % folds;
  }
  return fold_of;
}

CvLinkReport cv_select_link(const Dataset& data, const std::vector<LinkFamily>& links,
                            const CvOptions& options) {
  if (links.empty()) throw Error(ErrorCode::InvalidArgs, "no links to compare");
  if (options.path_length < 1) throw Error(ErrorCode::InvalidArgs, "path length must be at least 1");
  CvLinkReport rep;
  rep.folds = options.folds;
  rep.fold_of = stratified_folds(data.y(), options.folds, options.seed);
  for (const auto& lf : links) rep.links.push_back(lf.link().name());

  std::vector<std::vector<std::size_t>> train(options.folds), test(options.folds);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t f = 0; f < options.folds; ++f) {
      (rep.fold_of[i] == f ? test[f] : train[f]).push_back(i);
    }
  }
  for (std::size_t f = 0; f < options.folds; ++f) {
    if (train[f].size() < 3) {
      throw Error(ErrorCode::FoldTooSmall,
                  fmt::format("training set of fold {} has {} rows", f + 1, train[f].size()));
    }
  }

  SelectConfig base;
  base.gammas = {options.gamma};
  base.screen_threshold = options.screen_threshold;
  base.screen_keep = options.screen_keep;
  base.fit = options.fit;
  base.threads = 1;

  const std::size_t n_folds = options.folds;
  rep.per_fold.assign(links.size(), std::vector<double>(n_folds, kNegInf));
  parallel_for(links.size() * n_folds, options.threads, [&](std::size_t task) {
    const std::size_t l = task / n_folds;
    const std::size_t f = task % n_folds;
    try {
      const Dataset tr = data.subset_rows(train[f]);
      SelectConfig cfg = base;
      cfg.max_steps = options.path_length;
      const SelectionReport sel = select_pipeline(links[l], tr, cfg);
      const SelectionPath& path = sel.path_for(0);
      const std::size_t len = path.final_prefix[0];
      rep.per_fold[l][f] =
          held_out_loglik(links[l], data, test[f], path.prefix_features(len), prefix_fit(path, len).beta);
    } catch (const Error&) {
      // fold left at -inf
    }
  });

  rep.criterion.resize(links.size());
  bool any_finite = false;
  for (std::size_t l = 0; l < links.size(); ++l) {
    rep.criterion[l] = std::accumulate(rep.per_fold[l].begin(), rep.per_fold[l].end(), 0.0);
    any_finite = any_finite || std::isfinite(rep.criterion[l]);
  }
  if (!any_finite) throw Error(ErrorCode::FoldTooSmall, "no link could be fitted on every training fold");
  rep.chosen = 0;
  for (std::size_t l = 1; l < links.size(); ++l) {
    if (rep.criterion[l] > rep.criterion[rep.chosen]) rep.chosen = l;
  }
  return rep;
}

FinalReport real_data_workflow(const Dataset& data, const std::vector<LinkFamily>& links,
                               const WorkflowOptions& options) {
  if (links.empty()) throw Error(ErrorCode::InvalidArgs, "no links given");
  for (const auto& lf : links) data.validate_response(lf.family());
  FinalReport rep;
  rep.gamma = options.cv.gamma.resolve(data.n(), data.p());
  SelectConfig cfg;
  cfg.gammas = {options.cv.gamma};
  cfg.max_steps = options.path_length;
  cfg.screen_threshold = options.cv.screen_threshold;
  cfg.screen_keep = options.cv.screen_keep;
  cfg.fit = options.cv.fit;
  cfg.threads = options.cv.threads;
  rep.path_length = cfg.resolve_max_steps(data.n());

  for (const auto& lf : links) {
    const SelectionReport sel = select_pipeline(lf, data, cfg);
    rep.screened = sel.screened;
    LinkOutcome out;
    out.link = lf.link().name();
    out.path = sel.path_for(0);
    out.final_features = sel.final_order[0];
    out.final_loglik = sel.final_scores[0].loglik;
    out.final_ebic = sel.final_scores[0].ebic;
    rep.links.push_back(std::move(out));
  }
  rep.cv = cv_select_link(data, links, options.cv);
  return rep;
}

std::string one_based_list(const std::vector<std::size_t>& features) {
  std::string s;
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(features[k] + 1);
  }
  return s;
}

void write_cv_tsv(std::ostream& out, const CvLinkReport& report) {
  out << "link\tcriterion";
  for (std::size_t f = 0; f < report.folds; ++f) out << "\tfold_" << f + 1;
  out << "\tchosen\n";
  for (std::size_t l = 0; l < report.links.size(); ++l) {
    out << report.links[l] << '\t' << fmt::format("{}", report.criterion[l]);
    for (double v : report.per_fold[l]) out << '\t' << fmt::format("{}", v);
    out << '\t' << (l == report.chosen ? 1 : 0) << '\n';
  }
}

void write_paths_tsv(std::ostream& out, const FinalReport& report, const Dataset& data) {
  out << "link\tstep\tfeature\tname\tloglik\tebic\n";
  for (const auto& l : report.links) {
    for (std::size_t s = 0; s < l.path.steps.size(); ++s) {
      const auto& step = l.path.steps[s];
      out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", l.link, s + 1, step.feature + 1,
                         feature_label(data, step.feature), step.fit.loglik, step.scores[0].ebic);
    }
  }
}

void write_final_tsv(std::ostream& out, const FinalReport& report, const Dataset& data) {
  out << "link\tgamma\tsize\tfeatures\tnames\tloglik\tebic\tcv_chosen\n";
  for (std::size_t l = 0; l < report.links.size(); ++l) {
    const auto& o = report.links[l];
    std::string names;
    for (std::size_t k = 0; k < o.final_features.size(); ++k) {
      if (k) names += ',';
      names += feature_label(data, o.final_features[k]);
    }
    const bool chosen = report.cv.chosen_link() == o.link;
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", o.link, report.gamma,
                       o.final_features.size(), one_based_list(o.final_features), names,
                       o.final_loglik, o.final_ebic, chosen ? 1 : 0);
  }
}

}  // namespace glmebic
