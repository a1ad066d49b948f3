#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "glmebic/error.hpp"
#include "glmebic/experiments.hpp"
#include "oracles.hpp"

using namespace glmebic;

namespace {

SimDesign tiny_design() {
  SimDesign d;
  d.setting = Setting::S1;
  d.n = 120;
  d.pn = 60;
  d.p0n = 3;
  d.L = 10;
  d.q = 15;
  return d;
}

std::vector<LinkFamily> four_links() {
  std::vector<LinkFamily> out;
  for (const char* l : {"logit", "probit", "cauchit", "cloglog"}) out.push_back(make_link_family("bernoulli", l));
  return out;
}

}  // namespace

TEST_CASE("PDR and FDR by set counts") {
  auto r = pdr_fdr(std::vector<std::size_t>{1, 2, 3}, std::vector<std::size_t>{1, 2, 4});
  CHECK(r.pdr == doctest::Approx(2.0 / 3.0));
  CHECK(r.fdr == doctest::Approx(1.0 / 3.0));
  r = pdr_fdr(std::vector<std::size_t>{4, 2, 1}, std::vector<std::size_t>{1, 2, 4});
  CHECK(r.pdr == 1.0);
  CHECK(r.fdr == 0.0);
  r = pdr_fdr(std::vector<std::size_t>{}, std::vector<std::size_t>{1, 2, 4});
  CHECK(r.pdr == 0.0);
  CHECK(r.fdr == 0.0);
  CHECK_THROWS_AS(pdr_fdr(std::vector<std::size_t>{1}, std::vector<std::size_t>{}), Error);
}

TEST_CASE("stratified folds form a balanced partition") {
  std::vector<double> y;
  for (int i = 0; i < 72; ++i) y.push_back(i < 47 ? 0.0 : 1.0);
  const auto folds = stratified_folds(y, 8, 5);
  REQUIRE(folds.size() == 72);
  std::map<std::size_t, int> size, ones;
  for (std::size_t i = 0; i < 72; ++i) {
    CHECK(folds[i] < 8);
    ++size[folds[i]];
    ones[folds[i]] += y[i] == 1.0;
  }
  CHECK(size.size() == 8);
  for (auto [f, s] : size) CHECK(s == 9);
  for (auto [f, c] : ones) CHECK((c == 3 || c == 4));
  CHECK(stratified_folds(y, 8, 5) == folds);
  CHECK(stratified_folds(y, 8, 6) != folds);
  try {
    stratified_folds(y, 73, 1);
    FAIL("expected FoldTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FoldTooSmall);
  }
}

TEST_CASE("simulation batch: single replicate has no SE; runs are reproducible") {
  SelectConfig cfg;
  const ExperimentSummary one = run_simulation_batch(tiny_design(), 1, cfg, 3);
  REQUIRE(one.cells.size() == 4);
  CHECK_FALSE(one.cells[0].se_pdr.has_value());
  CHECK(one.cells[0].n_reps + one.cells[0].n_failed == 1);

  const ExperimentSummary a = run_simulation_batch(tiny_design(), 4, cfg, 11, 1);
  const ExperimentSummary b = run_simulation_batch(tiny_design(), 4, cfg, 11, 3);
  std::ostringstream sa, sb, ra, rb;
  write_summary_tsv(sa, {a});
  write_summary_tsv(sb, {b});
  write_replicates_tsv(ra, {a});
  write_replicates_tsv(rb, {b});
  CHECK(sa.str() == sb.str());
  CHECK(ra.str() == rb.str());
  for (const auto& c : a.cells) {
    CHECK(c.mean_pdr >= 0.0);
    CHECK(c.mean_pdr <= 1.0);
    CHECK(c.mean_fdr >= 0.0);
    CHECK(c.mean_fdr <= 1.0);
  }
  CHECK(sa.str().rfind("setting\trho\tn\tgamma\tmean_pdr\tse_pdr\tmean_fdr\tse_fdr\tn_reps\tn_failed\n", 0) == 0);
}

TEST_CASE("CV link choice: tie goes to the first link, LOO works") {
  const LinkFamily logit = make_link_family("bernoulli", "logit");
  const Dataset d = oracle::strong_signal_instance(40, 3, {0}, {1.5}, 21, logit);
  CvOptions opt;
  opt.folds = 4;
  opt.path_length = 2;
  const CvLinkReport tie = cv_select_link(d, {logit, logit}, opt);
  CHECK(tie.criterion[0] == tie.criterion[1]);
  CHECK(tie.chosen == 0);

  opt.folds = d.n();
  const CvLinkReport loo = cv_select_link(d, four_links(), opt);
  CHECK(loo.per_fold[0].size() == d.n());
  CHECK(loo.chosen < 4);
  for (double c : loo.criterion) CHECK(c < 0.0);
}

TEST_CASE("CV is deterministic across thread counts") {
  const LinkFamily logit = make_link_family("bernoulli", "logit");
  const Dataset d = oracle::strong_signal_instance(80, 10, {2, 7}, {1.4, -1.1}, 22, logit);
  CvOptions opt;
  opt.path_length = 3;
  const CvLinkReport a = cv_select_link(d, four_links(), opt);
  opt.threads = 3;
  const CvLinkReport b = cv_select_link(d, four_links(), opt);
  CHECK(a.criterion == b.criterion);
  CHECK(a.chosen == b.chosen);
}

TEST_CASE("real-data workflow keeps an overwhelming predictor") {
  const LinkFamily logit = make_link_family("bernoulli", "logit");
  const Dataset d = oracle::strong_signal_instance(72, 40, {17}, {4.0}, 23, logit);
  WorkflowOptions w;
  w.path_length = 8;
  w.cv.path_length = 3;
  const FinalReport rep = real_data_workflow(d, four_links(), w);
  REQUIRE(rep.links.size() == 4);
  for (const auto& l : rep.links) {
    CAPTURE(l.link);
    CHECK(l.path.steps.front().feature == 17);
    CHECK(std::find(l.final_features.begin(), l.final_features.end(), 17) != l.final_features.end());
  }
  // brute-force single-feature EBIC agrees that feature 17 is the best single predictor
  double best = INFINITY;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < d.p(); ++j) {
    const double e = ebic_value(fit_mle(logit, d, ModelIndex({j})).loglik, 1, d.n(), d.p(), rep.gamma);
    if (e < best) {
      best = e;
      arg = j;
    }
  }
  CHECK(arg == 17);
  std::ostringstream paths, fin, cv;
  write_paths_tsv(paths, rep, d);
  write_final_tsv(fin, rep, d);
  write_cv_tsv(cv, rep.cv);
  CHECK(fin.str().find("\t18") != std::string::npos);
  CHECK(one_based_list({1833, 4437}) == "1834,4438");
}
