#include <doctest.h>

#include <cmath>
#include <random>

#include "glmebic/error.hpp"
#include "glmebic/select.hpp"
#include "oracles.hpp"

using namespace glmebic;

namespace {

const LinkFamily& logit() {
  static const LinkFamily lf = make_link_family("bernoulli", "logit");
  return lf;
}

Dataset signal_data(std::size_t n, std::size_t p, std::uint64_t seed) {
  return oracle::strong_signal_instance(n, p, {1, 4}, {1.5, -1.2}, seed, logit());
}

void check_path_invariants(const SelectionPath& path) {
  double prev = path.null_fit.loglik;
  for (const auto& s : path.steps) {
    CHECK(s.fit.loglik >= prev - 1e-8);
    prev = s.fit.loglik;
  }
  for (std::size_t g = 0; g < path.gammas.size(); ++g) {
    const std::size_t best = path.final_prefix[g];
    for (std::size_t len = 0; len <= path.steps.size(); ++len) {
      if (len < best) CHECK(path.prefix_ebic(len, g) > path.prefix_ebic(best, g));
      if (len > best) CHECK(path.prefix_ebic(len, g) >= path.prefix_ebic(best, g));
    }
  }
}

}  // namespace

TEST_CASE("single candidate, one step") {
  const Dataset d = signal_data(60, 8, 1);
  const SelectionPath p = forward_select(logit(), d, {5}, {0.0}, 1);
  REQUIRE(p.steps.size() == 1);
  CHECK(p.steps[0].feature == 5);
}

TEST_CASE("step 1 equals the brute-force single-feature EBIC argmin") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = signal_data(60, 8, seed);
    const double gamma = 0.5;
    std::size_t best = 0;
    double best_e = INFINITY;
    for (std::size_t j = 0; j < 8; ++j) {
      const FitResult f = fit_mle(logit(), d, ModelIndex({j}));
      const double e = ebic_value(f.loglik, 1, d.n(), d.p(), gamma);
      if (e < best_e) {
        best_e = e;
        best = j;
      }
    }
    std::vector<std::size_t> all(8);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const SelectionPath p = forward_select(logit(), d, all, {gamma, 0.0, 1.0}, 4);
    CHECK(p.steps.front().feature == best);
    check_path_invariants(p);
  }
}

TEST_CASE("duplicate columns: the lower index wins") {
  const Dataset base = signal_data(80, 6, 3);
  std::vector<double> x;
  for (std::size_t j : {0, 1, 2, 1, 3, 4, 5}) {
    const auto c = base.column(j);
    x.insert(x.end(), c.begin(), c.end());
  }
  const Dataset d(std::vector<double>(base.y().begin(), base.y().end()), x, 7);
  const SelectionPath p = forward_select(logit(), d, {3, 1, 0, 2, 4, 5, 6}, {0.0}, 1);
  CHECK(p.steps[0].feature == 1);
}

TEST_CASE("screening ranks by |slope| with index tie-break") {
  const Dataset base = signal_data(100, 5, 4);
  std::vector<double> x;
  for (std::size_t j : {0, 1, 1, 2, 3, 4}) {
    const auto c = base.column(j);
    x.insert(x.end(), c.begin(), c.end());
  }
  x.insert(x.end(), 100, 3.0);  // constant feature 6
  const Dataset d(std::vector<double>(base.y().begin(), base.y().end()), x, 7);
  const ScreenResult s = screen_mme(logit(), d, 3);
  CHECK(s.keep.size() == 3);
  CHECK(s.statistics[1] == s.statistics[2]);
  CHECK(s.statistics[6] == 0.0);
  CHECK(s.ranked_features.back() == 6);
  const auto pos1 = std::find(s.ranked_features.begin(), s.ranked_features.end(), 1);
  CHECK(*(pos1 + 1) == 2);
  for (std::size_t j = 0; j + 1 < s.ranked_features.size(); ++j) {
    CHECK(s.statistics[s.ranked_features[j]] >= s.statistics[s.ranked_features[j + 1]]);
  }
  CHECK(screen_mme(logit(), d, 50).keep.size() == 7);
  CHECK_THROWS_AS(screen_mme(logit(), d, 0), Error);
}

TEST_CASE("errors") {
  const Dataset d = signal_data(40, 4, 5);
  try {
    forward_select(logit(), d, {}, {0.0}, 3);
    FAIL("expected EmptyCandidates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCandidates);
  }
  std::vector<double> x(80, 1.0);  // two constant columns: every candidate is rank deficient
  const Dataset c(std::vector<double>(d.y().begin(), d.y().end()), x, 2);
  try {
    forward_select(logit(), c, {0, 1}, {0.0}, 2);
    FAIL("expected PathEmpty");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PathEmpty);
  }
}

TEST_CASE("pipeline: screening threshold and determinism across thread counts") {
  const Dataset d = signal_data(90, 50, 6);
  SelectConfig cfg;
  cfg.max_steps = 6;
  const SelectionReport a = select_pipeline(logit(), d, cfg);
  CHECK_FALSE(a.screened);
  CHECK(a.candidates.size() == 50);
  cfg.threads = 3;
  const SelectionReport b = select_pipeline(logit(), d, cfg);
  REQUIRE(a.paths[0].steps.size() == b.paths[0].steps.size());
  for (std::size_t s = 0; s < a.paths[0].steps.size(); ++s) {
    CHECK(a.paths[0].steps[s].feature == b.paths[0].steps[s].feature);
    CHECK(a.paths[0].steps[s].fit.loglik == b.paths[0].steps[s].fit.loglik);
  }
  CHECK(a.final_models == b.final_models);

  cfg.screen_threshold = 20;
  cfg.screen_keep = 10;
  const SelectionReport c = select_pipeline(logit(), d, cfg);
  CHECK(c.screened);
  CHECK(c.candidates.size() == 10);
  for (const auto& s : c.paths[0].steps) {
    CHECK(std::find(c.candidates.begin(), c.candidates.end(), s.feature) != c.candidates.end());
  }
}

TEST_CASE("true features are recovered under strong signal") {
  const Dataset d = signal_data(300, 30, 7);
  SelectConfig cfg;
  const SelectionReport r = select_pipeline(logit(), d, cfg);
  CHECK(r.final_models[3].indices == std::vector<std::size_t>{1, 4});  // gamma4
  check_path_invariants(r.paths[0]);
}

TEST_CASE("path per gamma keeps gamma order in the read-out") {
  const Dataset d = signal_data(100, 20, 8);
  SelectConfig cfg;
  cfg.max_steps = 5;
  cfg.path_per_gamma = true;
  const SelectionReport r = select_pipeline(logit(), d, cfg);
  REQUIRE(r.paths.size() == 4);
  for (std::size_t g = 0; g < 4; ++g) {
    CHECK(r.paths[g].gammas == r.gammas);
    check_path_invariants(r.paths[g]);
  }
  cfg.path_per_gamma = false;
  const SelectionReport shared = select_pipeline(logit(), d, cfg);
  // Candidates at one step share |s|, so every gamma builds the same path.
  for (std::size_t g = 0; g < 4; ++g) CHECK(r.final_models[g] == shared.final_models[g]);
}

TEST_CASE("default step limit") {
  SelectConfig cfg;
  CHECK(cfg.resolve_max_steps(72) == 50);
  CHECK(cfg.resolve_max_steps(30) == 28);
  cfg.true_model_size = 7;
  CHECK(cfg.resolve_max_steps(100) == 21);
  cfg.max_steps = 5;
  CHECK(cfg.resolve_max_steps(100) == 5);
}

TEST_CASE("forward EBIC never beats the exhaustive minimum") {
  int equal = 0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const Dataset d = oracle::strong_signal_instance(80, 8, {0, 3, 6}, {1.2, -1.0, 1.4}, 1000 + r, logit());
    std::vector<std::size_t> all(8);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const double gamma = 0.5;
    const SelectionPath p = forward_select(logit(), d, all, {gamma}, 3);
    const double fwd = p.prefix_ebic(p.final_prefix[0], 0);
    const oracle::SubsetBest best = oracle::exhaustive_min(logit(), d, 3, gamma);
    CHECK(fwd >= best.ebic - 1e-7);
    if (std::abs(fwd - best.ebic) <= 1e-7) ++equal;
  }
  CHECK(equal >= reps * 8 / 10);
}
