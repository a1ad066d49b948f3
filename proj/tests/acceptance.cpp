// Acceptance runner: one PASS/FAIL/SKIP line per criterion, non-zero exit on any FAIL.

#include <fmt/format.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "glmebic/cli.hpp"
#include "glmebic/ebic.hpp"
#include "glmebic/experiments.hpp"
#include "glmebic/parallel.hpp"
#include "glmebic/select.hpp"
#include "glmebic/simgen.hpp"
#include "oracles.hpp"

using namespace glmebic;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. analytic score / Hessian against central differences

Outcome derivatives() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_score = 0.0, worst_hess = 0.0;
  std::string worst_pair;
  std::size_t checked = 0;
  std::mt19937_64 dims(101);
  for (const auto& spec : oracle::supported_pairs()) {
    const LinkFamily lf = make_link_family(spec.family, spec.link);
    for (std::uint64_t r = 0; r < 50; ++r) {
      const std::size_t n = 10 + dims() % 41;
      const std::size_t k = 1 + dims() % 4;
      const auto inst = oracle::random_instance(lf, spec, n, k, 1000 + r);
      const Eigen::VectorXd g = score(lf, inst.data, inst.model, inst.beta);
      const HessianParts hp = hessian_parts(lf, inst.data, inst.model, inst.beta);
      const Eigen::MatrixXd neg_hess = hp.h1 - hp.h0;
      const double es = oracle::max_rel_err(g, oracle::fd_score(lf, inst));
      const double eh = oracle::max_rel_err(neg_hess, -oracle::fd_hessian(lf, inst));
      if (es > worst_score || eh > worst_hess) worst_pair = spec.family + "/" + spec.link;
      worst_score = std::max(worst_score, es);
      worst_hess = std::max(worst_hess, eh);
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  return pass_if(worst_score < 1e-6 && worst_hess < 1e-4 && secs < 10.0,
                 fmt::format("{} instances; max rel err score {:.2e} (< 1e-6), H1-H0 {:.2e} (< 1e-4), "
                             "worst {}; {:.2f}s (< 10s)",
                             checked, worst_score, worst_hess, worst_pair, secs));
}

// ---------------------------------------------------------------------------
// 2. logit: H0 vanishes, Newton agrees with plain IRLS

Outcome canonical_reduction() {
  const LinkFamily lf = make_link_family("bernoulli", "logit");
  const oracle::PairSpec spec{"bernoulli", "logit", 0.0, 0.8};
  bool h0_zero = true;
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto inst = oracle::random_instance(lf, spec, 60 + 5 * r, 1 + r % 4, 2000 + r);
    const HessianParts hp = hessian_parts(lf, inst.data, inst.model, inst.beta);
    h0_zero = h0_zero && (hp.h0.array() == 0.0).all();
    const FitResult f = fit_mle(lf, inst.data, inst.model);
    const Eigen::MatrixXd x = oracle::dense_columns(inst.data, inst.model.indices);
    Eigen::VectorXd y(static_cast<long>(inst.data.n()));
    for (std::size_t i = 0; i < inst.data.n(); ++i) y[static_cast<long>(i)] = inst.data.y()[i];
    const Eigen::VectorXd ref = oracle::irls_logit(x, y);
    worst = std::max(worst, f.converged ? (f.beta - ref).lpNorm<Eigen::Infinity>() : INFINITY);
  }
  return pass_if(h0_zero && worst < 1e-6,
                 fmt::format("H0 exactly zero on 20 instances: {}; max |dbeta| vs IRLS {:.2e} (< 1e-6)",
                             h0_zero ? "yes" : "no", worst));
}

// ---------------------------------------------------------------------------
// 3. EBIC identities

Outcome ebic_identities() {
  bool bic = true, decomposition = true;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> ll(-500.0, -1.0);
  for (int r = 0; r < 200; ++r) {
    const std::size_t n = 10 + rng() % 1000, p = 2 + rng() % 5000, k = rng() % std::min<std::size_t>(p, 20);
    const double l = ll(rng);
    bic = bic && ebic_value(l, k, n, p, 0.0) == -2.0 * l + static_cast<double>(k) * std::log(static_cast<double>(n));
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const ModelScore s = ebic_score(l, ModelIndex(idx), n, p, 0.37);
    decomposition = decomposition &&
                    std::abs(s.ebic - (-2.0 * s.loglik + s.size_penalty + s.prior_penalty)) <=
                        4.0 * std::numeric_limits<double>::epsilon() * std::abs(s.ebic);
  }
  double worst = 0.0;
  for (unsigned p = 0; p <= 60; ++p) {
    for (unsigned k = 0; k <= p; ++k) {
      worst = std::max(worst, std::abs(log_choose(p, k) - oracle::log_of(oracle::choose_exact(p, k))));
    }
  }
  return pass_if(bic && decomposition && worst < 1e-9,
                 fmt::format("gamma=0 equals BIC: {}; score decomposition: {}; log C(p,k) max abs err "
                             "{:.2e} for p <= 60 (< 1e-9)",
                             bic ? "exact" : "broken", decomposition ? "holds" : "broken", worst));
}

// ---------------------------------------------------------------------------
// 4. forward selection against exhaustive search

Outcome forward_oracle() {
  const char* links[] = {"logit", "probit", "cloglog", "cauchit"};
  const std::size_t n = 80, p = 8;
  std::size_t step1_agree = 0, bound_holds = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const LinkFamily lf = make_link_family("bernoulli", links[seed % 4]);
    std::mt19937_64 rng(4000 + seed);
    std::vector<std::size_t> support;
    std::vector<double> coef;
    const std::size_t k0 = 2 + rng() % 2;
    while (support.size() < k0) {
      const std::size_t j = rng() % p;
      if (std::find(support.begin(), support.end(), j) != support.end()) continue;
      support.push_back(j);
      coef.push_back((rng() % 2 ? 1.0 : -1.0) * (1.0 + 0.5 * std::uniform_real_distribution<double>()(rng)));
    }
    const Dataset d = oracle::strong_signal_instance(n, p, support, coef, 5000 + seed, lf);
    std::vector<double> gammas;
    for (const char* g : {"gamma1", "gamma2", "gamma3", "gamma4"}) gammas.push_back(GammaSpec::parse(g).resolve(n, p));
    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const SelectionPath path = forward_select(lf, d, all, gammas, 3);

    double best_e = INFINITY;
    std::size_t best_j = p;
    for (std::size_t j = 0; j < p; ++j) {
      const FitResult f = fit_mle(lf, d, ModelIndex({j}));
      if (!f.usable()) continue;
      const double e = ebic_value(f.loglik, 1, n, p, gammas[0]);
      if (e < best_e) {
        best_e = e;
        best_j = j;
      }
    }
    step1_agree += !path.steps.empty() && path.steps.front().feature == best_j;

    bool ok = true;
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const double forward = path.prefix_ebic(path.final_prefix[g], g);
      const double exhaustive = oracle::exhaustive_min(lf, d, 3, gammas[g]).ebic;
      ok = ok && forward >= exhaustive - 1e-9 * std::abs(exhaustive);
    }
    bound_holds += ok;
    ++total;
  }
  return pass_if(step1_agree == total && bound_holds == total,
                 fmt::format("step 1 = exhaustive single-feature argmin in {}/{}; final forward EBIC >= "
                             "exhaustive size<=3 minimum in {}/{} (all 4 gammas)",
                             step1_agree, total, bound_holds, total));
}

// ---------------------------------------------------------------------------
// 5 and 6. Setting 1, rho = 0 Monte-Carlo at n = 100, 200, 500

struct McTable {
  std::map<std::size_t, ExperimentSummary> by_n;
  double seconds = 0.0;
  const CellSummary& cell(std::size_t n, std::size_t g) const { return by_n.at(n).cells.at(g); }
};

const McTable& monte_carlo() {
  static const McTable table = [] {
    McTable t;
    const auto t0 = std::chrono::steady_clock::now();
    SelectConfig cfg;
    for (std::size_t n : {100u, 200u, 500u}) {
      t.by_n[n] = run_simulation_batch(design_for(Setting::S1, n, 0.0), 50, cfg, 2024, default_thread_count());
    }
    t.seconds = seconds_since(t0);
    return t;
  }();
  return table;
}

std::string table_text(const McTable& t) {
  std::string s;
  for (const auto& [n, sum] : t.by_n) {
    s += fmt::format("\n    n={:<4}", n);
    for (const auto& c : sum.cells) s += fmt::format(" {} PDR {:.3f} FDR {:.3f} |", c.gamma_label, c.mean_pdr, c.mean_fdr);
    s += fmt::format(" failed {}", sum.cells.front().n_failed);
  }
  return s;
}

Outcome table1_reproduction() {
  const McTable& t = monte_carlo();
  struct Target {
    std::size_t n, g;
    bool pdr;
    double value;
  };
  const Target targets[] = {{100, 3, true, 0.481}, {100, 3, false, 0.074}, {500, 3, true, 0.936},
                            {500, 3, false, 0.026}, {500, 2, false, 0.079}, {500, 0, false, 0.408}};
  bool ok = true;
  std::string detail = "50 replicates, seed 2024, tolerance 0.12:";
  for (const auto& tg : targets) {
    const CellSummary& c = t.cell(tg.n, tg.g);
    const double got = tg.pdr ? c.mean_pdr : c.mean_fdr;
    const bool hit = std::abs(got - tg.value) <= 0.12;
    ok = ok && hit;
    detail += fmt::format("\n    n={} gamma{} {} {:.3f} vs {:.3f} (diff {:+.3f}) {}", tg.n, tg.g + 1,
                          tg.pdr ? "PDR" : "FDR", got, tg.value, got - tg.value, hit ? "ok" : "MISS");
  }
  detail += fmt::format("\n  full table ({:.0f}s):", t.seconds) + table_text(t);
  return pass_if(ok, detail);
}

Outcome consistency_trend() {
  const McTable& t = monte_carlo();
  bool ok = true;
  std::string detail;
  for (std::size_t g : {2u, 3u}) {
    const double f100 = t.cell(100, g).mean_fdr, f500 = t.cell(500, g).mean_fdr, p500 = t.cell(500, g).mean_pdr;
    ok = ok && f500 < f100 && p500 > 0.85;
    detail += fmt::format("gamma{}: FDR {:.3f} -> {:.3f}, PDR(500) {:.3f}; ", g + 1, f100, f500, p500);
  }
  const double f1 = t.cell(500, 0).mean_fdr;
  ok = ok && f1 > 0.25;
  detail += fmt::format("gamma1: FDR(500) {:.3f} (> 0.25)", f1);
  return pass_if(ok, detail);
}

// ---------------------------------------------------------------------------
// 7. generator moments at n = 5000

struct MomentChecks {
  bool ok = true;
  std::vector<std::string> lines;

  void check(const std::string& what, double got, double expected, double se) {
    const double z = std::abs(got - expected) / se;
    ok = ok && z <= 3.0;
    lines.push_back(fmt::format("{} {:.4f} vs {:.4f} ({:.2f} SE)", what, got, expected, z));
  }
};

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double corr_of(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Pooled mean, variance and adjacent-pair correlation over independent columns [lo, hi).
void iid_block(MomentChecks& mc, const Dataset& x, std::size_t lo, std::size_t hi, const std::string& name,
               double var, double mu4) {
  const double n = static_cast<double>(x.n()), m = static_cast<double>(hi - lo);
  double mean = 0.0, v = 0.0, c = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    mean += mean_of(x.column(j));
    v += var_of(x.column(j));
    if (j + 1 < hi) c += corr_of(x.column(j), x.column(j + 1));
  }
  mc.check(name + " mean", mean / m, 0.0, std::sqrt(var / (n * m)));
  mc.check(name + " variance", v / m, var, std::sqrt((mu4 - var * var) / (n * m)));
  mc.check(name + " adjacent corr", c / (m - 1.0), 0.0, 1.0 / std::sqrt(n * (m - 1.0)));
}

Outcome generator_moments() {
  MomentChecks mc;
  const double rho = 0.5;
  {
    const SimDesign d = design_for(Setting::S1, 5000, rho);
    const SimReplicate r = generate_replicate(d, 77, 0);
    const Dataset& x = r.dataset;
    const double n = static_cast<double>(d.n);
    // compound-symmetric block; estimates are dependent, so the single-estimate SE bounds the pooled one
    double c = 0.0, v = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < d.q; ++a) {
      v += var_of(x.column(a));
      for (std::size_t b = a + 1; b < d.q; ++b, ++pairs) c += corr_of(x.column(a), x.column(b));
    }
    mc.check("S1 block 1 corr", c / static_cast<double>(pairs), rho, (1.0 - rho * rho) / std::sqrt(n));
    mc.check("S1 block 1 variance", v / static_cast<double>(d.q), 1.0, std::sqrt(2.0 / n));
    const std::size_t end2 = d.pn / 3, end3 = 2 * d.pn / 3;
    iid_block(mc, x, d.q, end2, "S1 normal block", 1.0, 3.0);
    iid_block(mc, x, end2, end3, "S1 Laplace block", 2.0, 24.0);
    iid_block(mc, x, end3, d.pn, "S1 mixture block", 1.75, 7.375);
    mc.check("S1 cross-block corr", corr_of(x.column(0), x.column(d.q)), 0.0, 1.0 / std::sqrt(n));
  }
  {
    const SimDesign d = design_for(Setting::S3, 5000, 0.0);
    const SimReplicate r = generate_replicate(d, 78, 0);
    const Dataset& x = r.dataset;
    const double n = static_cast<double>(d.n);
    iid_block(mc, x, 0, d.pn - d.q, "S3 normal block", 1.0, 3.0);
    double v = 0.0, c = 0.0;
    std::size_t terms = 0;
    for (std::size_t j = d.pn - d.q; j < d.pn; ++j) {
      v += var_of(x.column(j));
      for (std::size_t t = 1; t <= d.p0n; ++t, ++terms) {
        const double sign = t % 2 == 1 ? 1.0 : -1.0;
        c += sign * corr_of(x.column(j), x.column(d.L * t - 1));
      }
    }
    mc.check("S3 constructed variance", v / static_cast<double>(d.q), 1.0, std::sqrt(2.0 / n));
    mc.check("S3 signed corr with true features", c / static_cast<double>(terms), 0.2, (1.0 - 0.04) / std::sqrt(n));
  }
  bool pattern = true;
  for (Setting s : {Setting::S1, Setting::S2, Setting::S3}) {
    for (std::size_t n : {100u, 500u, 5000u}) {
      const SimDesign d = design_for(s, n, 0.0);
      const TrueModel t = true_model(d);
      pattern = pattern && t.support.size() == d.p0n;
      for (std::size_t k = 0; k < t.support.size(); ++k) {
        pattern = pattern && t.support[k] == d.L * (k + 1) - 1 && t.coefficients[k] == (k % 2 == 0 ? 1.0 : 1.3);
      }
    }
  }
  mc.ok = mc.ok && pattern;
  std::string detail = fmt::format("true-model pattern {}", pattern ? "exact" : "WRONG");
  for (const auto& l : mc.lines) detail += "\n    " + l;
  return pass_if(mc.ok, detail);
}

// ---------------------------------------------------------------------------
// 8. real-data workflow, when the data are supplied

Outcome real_data() {
  const char* path = std::getenv("GLMEBIC_GOLUB_CSV");
  if (path == nullptr) path = std::getenv("GOLUB_CSV");
  if (path == nullptr || !fs::exists(path)) {
    return {Verdict::Skip, "set GLMEBIC_GOLUB_CSV to a 72 x 7129 CSV (y first) to run"};
  }
  const Dataset d = read_csv(path);
  std::vector<LinkFamily> links;
  for (const char* l : {"logit", "probit", "cauchit", "cloglog"}) links.push_back(make_link_family("bernoulli", l));
  WorkflowOptions w;
  w.cv.threads = default_thread_count();
  const FinalReport rep = real_data_workflow(d, links, w);
  auto sorted = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto logit_set = sorted(rep.links[0].final_features);
  const auto cll_set = sorted(rep.links[3].final_features);
  const bool logit_ok = logit_set == std::vector<std::size_t>{1833, 4437};
  const bool cll_ok = std::find(cll_set.begin(), cll_set.end(), 4437) != cll_set.end();
  const bool cv_ok = rep.cv.chosen == 0;
  return pass_if(logit_ok && cll_ok && cv_ok,
                 fmt::format("logit final {{{}}} (want {{1834,4438}}); cloglog final {{{}}} (want 4438 in it); "
                             "CV chose {} (want logit)",
                             one_based_list(logit_set), one_based_list(cll_set), rep.cv.chosen_link()));
}

// ---------------------------------------------------------------------------
// 9. manifest re-runs, single- and multi-threaded

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != kExitOk) fmt::print(stderr, "cli failed ({}): {}\n", code, err.str());
  return code;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("glmebic_accept_{}", ::getpid());
  fs::remove_all(root);
  fs::create_directories(root);
  const LinkFamily logit = make_link_family("bernoulli", "logit");
  const fs::path csv = root / "data.csv";
  write_csv(oracle::strong_signal_instance(90, 30, {4, 11, 20}, {1.5, -1.2, 1.0}, 909, logit), csv);
  const fs::path beta = root / "beta.txt";
  {
    std::ofstream b(beta);
    for (std::size_t j = 0; j < 30; ++j) b << (j == 4 ? 1.5 : j == 11 ? -1.2 : j == 20 ? 1.0 : 0.0) << "\n";
  }

  const std::vector<std::pair<std::string, std::vector<std::string>>> workflows{
      {"fit", {"fit", "--input", csv.string(), "--link", "probit", "--features", "5,12,21"}},
      {"select", {"select", "--input", csv.string(), "--link", "cloglog", "--max-steps", "8"}},
      {"simulate", {"simulate", "--setting", "1", "--rho", "0.2", "--n", "100", "--reps", "4", "--seed", "11",
                    "--max-steps", "6"}},
      {"cv-links", {"cv-links", "--input", csv.string(), "--folds", "4", "--cv-path-length", "3", "--full",
                    "--path-length", "6", "--seed", "5"}},
      {"diagnose", {"diagnose", "--input", csv.string(), "--beta-file", beta.string(), "--link", "cloglog"}},
  };
  bool ok = true;
  std::string detail;
  const std::string multi = std::to_string(std::max<std::size_t>(3, default_thread_count()));
  for (const auto& [name, args] : workflows) {
    const fs::path a = root / (name + "_a"), b = root / (name + "_1"), c = root / (name + "_n");
    auto first = args;
    first.insert(first.end(), {"--threads", "1", "--output-dir", a.string()});
    bool same = cli(first) == kExitOk;
    same = same && cli({"--config", (a / "manifest.json").string(), "--threads", "1", "--output-dir", b.string()}) == kExitOk;
    same = same && cli({"--config", (a / "manifest.json").string(), "--threads", multi, "--output-dir", c.string()}) == kExitOk;
    std::size_t tables = 0;
    if (same) {
      for (const auto& entry : fs::directory_iterator(a)) {
        const auto file = entry.path().filename();
        if (file == "manifest.json") continue;
        ++tables;
        const std::string ref = slurp(entry.path());
        same = same && fs::exists(b / file) && fs::exists(c / file) && slurp(b / file) == ref && slurp(c / file) == ref;
      }
    }
    ok = ok && same && tables > 0;
    detail += fmt::format("{} {} ({} tables); ", name, same ? "identical" : "DIFFERS", tables);
  }
  fs::remove_all(root);
  return pass_if(ok, detail + "threads 1 vs " + multi);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"derivatives", derivatives},
      {"canonical reduction", canonical_reduction},
      {"EBIC identities", ebic_identities},
      {"forward-selection oracle", forward_oracle},
      {"Setting 1 table reproduction", table1_reproduction},
      {"consistency trend", consistency_trend},
      {"generator moments", generator_moments},
      {"real-data workflow", real_data},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    failures += o.verdict == Verdict::Fail;
    fmt::print("criterion {} {} [{}]: {}\n", i + 1, tag, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
