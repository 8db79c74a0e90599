#include <gtest/gtest.h>

#include <cmath>

#include <dcpl/dcpl.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using namespace dcpl;

struct MnlCase {
  std::unique_ptr<ChoiceModel> model;
  EstimationResult base;
};

MnlCase fitted_mnl(std::size_t persons, std::uint64_t seed) {
  MnlCase c;
  c.model = make_model(ModelSpec::mnl(dcpltest::kAttributes), dcpltest::synthetic_mnl(persons, seed));
  c.base = maximize(make_objective(*c.model), c.model->template_parameters());
  attach_inference(c.base, *c.model);
  return c;
}

// Single-parameter result carrying a robust standard error.
EstimationResult result_with_se(double estimate, double se) {
  EstimationResult r;
  r.estimates = ParameterVector({{"b_tt", estimate}});
  r.convergence.status = ConvergenceStatus::gradient_convergence;
  Eigen::MatrixXd H(1, 1);
  H << -1.0;
  Eigen::MatrixXd S(1, 1);
  S << se;
  r.covariance = covariance_estimates(H, S, {"b_tt"});
  return r;
}

// ---------------------------------------------------------------- grid

TEST(CandidateGrid, DefaultSpacingAndMiddlePoint) {
  const auto g = build_candidate_grid(result_with_se(-0.0598, 0.0598 / 8.87), -4, 4, 51);
  ASSERT_EQ(g.gamma.size(), 51u);
  EXPECT_EQ(g.zero_index, 25u);
  EXPECT_EQ(g.gamma[25], 0.0);
  for (std::size_t m = 1; m < 51; ++m) EXPECT_NEAR(g.gamma[m] - g.gamma[m - 1], 0.16, 1e-14);
  EXPECT_EQ(g.gamma.front(), -4.0);
  EXPECT_EQ(g.gamma.back(), 4.0);
}

TEST(CandidateGrid, CandidateArithmetic) {
  const double se = 0.0598 / 8.87;
  EXPECT_NEAR(se, 0.006742, 1e-6);
  const auto g = build_candidate_grid(result_with_se(-0.0598, se), -4, 4, 51);
  EXPECT_NEAR(g.rows[0].candidates[0], -0.08677, 1e-5);
  EXPECT_EQ(g.rows[0].candidates[25], -0.0598);
}

TEST(CandidateGrid, MissingCovarianceSkipsRows) {
  auto r = result_with_se(1.0, 0.1);
  r.covariance.reset();
  const auto g = build_candidate_grid(r, -4, 4, 51);
  ASSERT_EQ(g.rows.size(), 1u);
  EXPECT_TRUE(g.rows[0].skipped);
  EXPECT_FALSE(g.rows[0].warning.empty());
}

TEST(CandidateGrid, InvalidSettingsRejected) {
  const auto r = result_with_se(1.0, 0.1);
  EXPECT_THROW(build_candidate_grid(r, -4, 4, 2), Error);
  EXPECT_THROW(build_candidate_grid(r, 4, -4, 51), Error);
}

// ---------------------------------------------------------------- profile pass

TEST(RunProfile, ThreePointGridRunsTwoFitsPerParameter) {
  const auto c = fitted_mnl(300, 51);
  ProfileSettings s;
  s.points = 3;
  const auto run = run_profile(*c.model, c.base, s);
  EXPECT_EQ(run.report.cells, 12u);
  EXPECT_EQ(run.report.estimations, 8u);
}

TEST(RunProfile, MnlHasNoImprovementsAndMonotoneCurves) {
  const auto c = fitted_mnl(500, 52);
  ProfileSettings s;
  s.points = 21;
  const auto run = run_profile(*c.model, c.base, s);
  EXPECT_EQ(run.report.improvements, 0u);
  EXPECT_EQ(run.report.failures, 0u);
  for (const auto& p : run.report.parameters) {
    EXPECT_TRUE(p.monotone) << p.parameter;
    EXPECT_FALSE(p.interval.lower_open);
    EXPECT_FALSE(p.interval.upper_open);
  }
}

TEST(RunProfile, MiddleCellIsBaseWithoutEstimation) {
  const auto c = fitted_mnl(300, 53);
  ProfileSettings s;
  s.points = 5;
  const auto run = run_profile(*c.model, c.base, s);
  for (const auto& f : run.fits) {
    if (f.m != run.grid.zero_index) continue;
    EXPECT_TRUE(f.noop);
    EXPECT_EQ(f.candidate, c.base.estimates[run.grid.rows[f.row].index].value);
    EXPECT_EQ(f.loglik, c.base.loglik);
  }
}

TEST(RunProfile, ConstrainedFitsHoldTheirCandidate) {
  const auto c = fitted_mnl(300, 54);
  ProfileSettings s;
  s.points = 5;
  const auto run = run_profile(*c.model, c.base, s);
  for (const auto& f : run.fits) {
    if (f.noop) continue;
    EXPECT_EQ(f.result.estimates.value(f.parameter), f.candidate);
    EXPECT_LE(f.loglik, c.base.loglik + 1e-9);
  }
}

TEST(RunProfile, UnconvergedBaseRejected) {
  auto c = fitted_mnl(100, 55);
  c.base.convergence.status = ConvergenceStatus::iteration_limit;
  EXPECT_THROW(run_profile(*c.model, c.base), Error);
}

// ---------------------------------------------------------------- refinement

TEST(Refine, DominatesConstrainedFitAndReachesMaximum) {
  const auto c = fitted_mnl(300, 56);
  ProfileSettings s;
  s.points = 5;
  const auto run = run_profile(*c.model, c.base, s);
  std::vector<const ConstrainedFit*> fits;
  for (const auto& f : run.fits) fits.push_back(&f);
  const auto refined = refine_solutions(*c.model, fits, s);
  ASSERT_EQ(refined.size(), fits.size());
  for (const auto& r : refined) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_GE(r.result.loglik, r.source->loglik - 1e-8);
    // Two cells in one (global) basin land on the same solution.
    EXPECT_TRUE(same_solution(r.result.estimates, r.result.loglik, c.base.estimates, c.base.loglik, {}));
  }
}

TEST(Refine, FixedPointIsUnchanged) {
  const auto c = fitted_mnl(300, 57);
  ConstrainedFit f;
  f.parameter = "b_tc";
  f.result = c.base;
  f.loglik = c.base.loglik;
  const auto refined = refine_solutions(*c.model, {&f});
  ASSERT_TRUE(refined[0].ok);
  EXPECT_NEAR(refined[0].result.loglik, c.base.loglik, 1e-9);
  EXPECT_LE(refined[0].result.convergence.iterations, 1u);
}

// ---------------------------------------------------------------- canonical form

TEST(Canonicalize, LatentClassSmallerFirstShareSwaps) {
  const auto spec = dcpltest::lc_spec();
  const ParameterLayout lay(spec);
  auto p = dcpltest::lc_truth();
  p.set_value(lay.class_constant(0), std::log(0.4 / 0.6));
  const auto cf = canonicalize(p, spec);
  EXPECT_TRUE(cf.changed);
  EXPECT_FALSE(cf.label_only);
  EXPECT_NEAR(cf.params[lay.class_constant(0)].value, std::log(0.6 / 0.4), 1e-15);
  EXPECT_EQ(cf.params[lay.class_constant(1)].value, 0.0);
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_EQ(cf.params[lay.class_coefficient(a, 0)].value, p[lay.class_coefficient(a, 1)].value);
    EXPECT_EQ(cf.params[lay.class_coefficient(a, 1)].value, p[lay.class_coefficient(a, 0)].value);
  }
  const auto ds = dcpltest::synthetic_mnl(100, 3);
  EXPECT_NEAR(lc_person_likelihood(ds, cf.params, spec).loglik,
              lc_person_likelihood(ds, p, spec).loglik, 1e-12);
}

TEST(Canonicalize, LatentClassAlreadyCanonical) {
  const auto cf = canonicalize(dcpltest::lc_truth(), dcpltest::lc_spec());
  EXPECT_FALSE(cf.changed);
  EXPECT_TRUE(cf.params == dcpltest::lc_truth());
}

TEST(Canonicalize, MixedLogitFlipsNegativeDiagonal) {
  const auto spec = dcpltest::mmnl_spec();
  const ParameterLayout lay(spec);
  auto p = dcpltest::mmnl_point();
  for (std::size_t row = 0; row < 4; ++row) {
    p.set_value(lay.cholesky(row, 0), -p[lay.cholesky(row, 0)].value);
  }
  const auto plain = canonicalize(p, spec, false);
  EXPECT_TRUE(plain.changed);
  EXPECT_TRUE(plain.label_only);
  EXPECT_TRUE(plain.params == dcpltest::mmnl_point());

  const auto exact = canonicalize(p, spec, true);
  EXPECT_FALSE(exact.label_only);

  SobolConfig cfg;
  cfg.draws_per_person = 32;
  cfg.dimensions = 4;
  cfg.antithetic = true;
  const auto ds = dcpltest::synthetic_mnl(30, 9);
  const auto draws = std::make_shared<const DrawMatrix>(build_person_draws(cfg, 30));
  EXPECT_NEAR(mmnl_simulated_likelihood(ds, exact.params, spec, draws).loglik,
              mmnl_simulated_likelihood(ds, p, spec, draws).loglik, 1e-12);
}

TEST(Canonicalize, MnlIsIdentity) {
  const auto cf = canonicalize(dcpltest::mnl_truth(), ModelSpec::mnl(dcpltest::kAttributes));
  EXPECT_FALSE(cf.changed);
  EXPECT_TRUE(cf.params == dcpltest::mnl_truth());
}

// ---------------------------------------------------------------- dedup

EstimationResult fake_result(const ParameterVector& p, double ll) {
  EstimationResult r;
  r.estimates = p;
  r.loglik = ll;
  r.convergence.status = ConvergenceStatus::gradient_convergence;
  return r;
}

TEST(Dedup, NearIdenticalResultsCollapse) {
  SolutionPool pool;
  std::vector<PoolCandidate> cands;
  const auto spec = ModelSpec::mnl(dcpltest::kAttributes);
  for (int i = 0; i < 99; ++i) {
    auto p = dcpltest::mnl_truth();
    p.set_value(0, p[0].value + 1e-6 * i);
    cands.push_back(make_candidate(fake_result(p, -1000.0 + 1e-7 * i), spec,
                                   {{1, 0, "b_tt", static_cast<std::size_t>(i), 0.0}}));
  }
  const auto added = dedup_solutions(std::move(cands), pool);
  EXPECT_EQ(added.size(), 1u);
  ASSERT_EQ(pool.solutions.size(), 1u);
  EXPECT_EQ(pool.solutions[0].lineage.size(), 99u);
  EXPECT_EQ(pool.solutions[0].lineage[0][0].m, 0u);  // first-found representative
}

TEST(Dedup, DistinctLikelihoodsKeptAndSorted) {
  SolutionPool pool;
  const auto spec = ModelSpec::mnl(dcpltest::kAttributes);
  std::vector<PoolCandidate> cands;
  cands.push_back(make_candidate(fake_result(dcpltest::mnl_truth(), -1005.0), spec, {}));
  cands.push_back(make_candidate(fake_result(dcpltest::mnl_truth(), -1000.0), spec, {}));
  dedup_solutions(std::move(cands), pool);
  ASSERT_EQ(pool.solutions.size(), 2u);
  EXPECT_EQ(pool.best().result.loglik, -1000.0);
  EXPECT_EQ(pool.best().id, 1u);
}

TEST(Dedup, ClassSwappedPairCollapses) {
  const auto spec = dcpltest::lc_spec();
  const ParameterLayout lay(spec);
  const auto p = dcpltest::lc_truth();
  auto q = p;
  for (std::size_t a = 0; a < 4; ++a) {
    q.set_value(lay.class_coefficient(a, 0), p[lay.class_coefficient(a, 1)].value);
    q.set_value(lay.class_coefficient(a, 1), p[lay.class_coefficient(a, 0)].value);
  }
  q.set_value(lay.class_constant(0), -p[lay.class_constant(0)].value);
  EXPECT_FALSE(same_solution(p, -900.0, q, -900.0, {}));
  SolutionPool pool;
  std::vector<PoolCandidate> cands;
  cands.push_back(make_candidate(fake_result(q, -900.0), spec, {}));
  cands.push_back(make_candidate(fake_result(p, -900.0), spec, {}));
  dedup_solutions(std::move(cands), pool);
  ASSERT_EQ(pool.solutions.size(), 1u);
  // The stored estimate is the canonical labeling.
  EXPECT_TRUE(pool.solutions[0].result.estimates == p);
}

TEST(Dedup, ToleranceBoundaries) {
  auto a = dcpltest::mnl_truth();
  auto b = a;
  b.set_value(3, a[3].value * (1 + 0.5e-3));
  EXPECT_TRUE(same_solution(a, -10.0, b, -10.00005, {}));
  EXPECT_FALSE(same_solution(a, -10.0, b, -10.0002, {}));
  b.set_value(3, a[3].value * (1 + 2e-3));
  EXPECT_FALSE(same_solution(a, -10.0, b, -10.0, {}));
}

// ---------------------------------------------------------------- search

TEST(Search, ConcaveMnlStopsAfterOneRound) {
  const auto c = fitted_mnl(300, 58);
  SearchSettings s;
  s.profile.points = 11;
  const auto res = iterate_search(*c.model, c.base, s);
  EXPECT_TRUE(res.certified);
  ASSERT_EQ(res.rounds.size(), 1u);
  EXPECT_EQ(res.rounds[0].improvements, 0u);
  ASSERT_EQ(res.pool.solutions.size(), 1u);
  EXPECT_EQ(res.pool.best().result.loglik, c.base.loglik);
  EXPECT_TRUE(res.pool.best().result.diagnostics.has_value());
  EXPECT_TRUE(res.pool.best().visited);
}

TEST(Search, ZeroBudgetRejected) {
  const auto c = fitted_mnl(100, 58);
  SearchSettings s;
  s.round_budget = 0;
  EXPECT_THROW(iterate_search(*c.model, c.base, s), Error);
}

// A small latent class problem with several local optima; coarse grid keeps
// each search to a few seconds.
struct SmallLc {
  std::unique_ptr<ChoiceModel> model;
  EstimationResult base;
};

SmallLc small_lc() {
  SmallLc c;
  const auto spec = dcpltest::lc_spec();
  const auto ds = std::make_shared<const ChoiceDataset>(
      synthesize_dataset(dcpltest::lc_truth(), dcpltest::travel_design(250), spec, 3));
  c.model = make_model(spec, ds);
  c.base = maximize(make_objective(*c.model), dcpltest::planted_lc_inferior_start());
  attach_inference(c.base, *c.model);
  return c;
}

SearchSettings small_search(SearchMode mode, std::size_t workers) {
  SearchSettings s;
  s.mode = mode;
  s.round_budget = 3;
  s.profile.points = 5;
  s.profile.workers = workers;
  return s;
}

TEST(Search, SmallLatentClassProperties) {
  const auto c = small_lc();
  ASSERT_TRUE(c.base.converged());

  const auto prag = iterate_search(*c.model, c.base, small_search(SearchMode::pragmatic, 1));
  const auto again = iterate_search(*c.model, c.base, small_search(SearchMode::pragmatic, 3));
  const auto exh = iterate_search(*c.model, c.base, small_search(SearchMode::exhaustive, 2));

  // Determinism across worker counts.
  ASSERT_EQ(prag.pool.solutions.size(), again.pool.solutions.size());
  for (std::size_t i = 0; i < prag.pool.solutions.size(); ++i) {
    EXPECT_EQ(prag.pool.solutions[i].result.loglik, again.pool.solutions[i].result.loglik);
  }

  for (const auto* res : {&prag, &exh}) {
    // Incumbents never decrease and every member carries diagnostics.
    for (const auto& r : res->rounds) EXPECT_GE(r.incumbent_after, r.incumbent_before);
    for (const auto& s : res->pool.solutions) {
      EXPECT_TRUE(s.result.converged());
      EXPECT_FALSE(s.lineage.empty());
    }
    EXPECT_GE(res->pool.best().result.loglik, c.base.loglik);
    EXPECT_EQ(res->incumbent_id, res->pool.best().id);
    if (res->certified) EXPECT_FALSE(res->rounds.back().improved_incumbent);
  }

  // Pragmatic mode profiles exactly one member per round.
  for (const auto& r : prag.rounds) EXPECT_LE(r.profiled.size(), 1u);

  // Every pragmatic pool member is also found by the exhaustive search.
  for (const auto& s : prag.pool.solutions) {
    bool found = false;
    for (const auto& e : exh.pool.solutions) {
      found = found || same_solution(s.canonical, s.result.loglik, e.canonical, e.result.loglik,
                                     exh.pool.tol);
    }
    EXPECT_TRUE(found) << "LL " << s.result.loglik;
  }
}

TEST(SearchMode, ParseAndPrint) {
  EXPECT_EQ(parse_search_mode("pragmatic"), SearchMode::pragmatic);
  EXPECT_EQ(to_string(SearchMode::exhaustive), "exhaustive");
  EXPECT_THROW(parse_search_mode("greedy"), Error);
}

}  // namespace
