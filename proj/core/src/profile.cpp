#include "dcpl/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "dcpl/errors.hpp"
#include "dcpl/parallel.hpp"

namespace dcpl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CurvePoint {
  double gamma;
  double ll;
};

// Value at g of the quadratic through the three curve points nearest to g;
// NaN unless g lies inside the covered gamma range.
double interpolate_curve(const std::vector<CurvePoint>& curve, double g) {
  if (curve.size() < 3 || g < curve.front().gamma || g > curve.back().gamma) return kNaN;
  std::vector<std::size_t> idx(curve.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + 3, idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(curve[a].gamma - g) < std::abs(curve[b].gamma - g);
  });
  double value = 0.0;
  for (int i = 0; i < 3; ++i) {
    double w = 1.0;
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      w *= (g - curve[idx[j]].gamma) / (curve[idx[i]].gamma - curve[idx[j]].gamma);
    }
    value += w * curve[idx[i]].ll;
  }
  return value;
}

void summarize_row(const GridRow& row, const std::vector<const ConstrainedFit*>& cells,
                   double ll_base, double tol, ParameterProfileSummary& out) {
  std::vector<CurvePoint> curve;
  std::vector<ProfilePoint> values;
  bool has_zero = false;
  for (const ConstrainedFit* f : cells) {
    if (f->failed) {
      ++out.failures;
      continue;
    }
    if (f->improved) ++out.improvements;
    curve.push_back({f->gamma, f->loglik});
    values.push_back({f->candidate, f->loglik});
    has_zero = has_zero || f->gamma == 0.0;
  }
  if (!has_zero) {
    curve.push_back({0.0, ll_base});
    values.push_back({row.estimate, ll_base});
  }
  std::stable_sort(curve.begin(), curve.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.gamma < b.gamma; });

  const auto zero = std::find_if(curve.begin(), curve.end(),
                                 [](const CurvePoint& p) { return p.gamma == 0.0; }) -
                    curve.begin();
  out.monotone = out.failures == 0;
  for (auto i = zero + 1; i < static_cast<std::ptrdiff_t>(curve.size()); ++i) {
    if (curve[i].ll > curve[i - 1].ll + tol) out.monotone = false;
  }
  for (auto i = zero - 1; i >= 0; --i) {
    if (curve[i].ll > curve[i + 1].ll + tol) out.monotone = false;
  }
  out.drop_lower = ll_base - interpolate_curve(curve, -1.96);
  out.drop_upper = ll_base - interpolate_curve(curve, 1.96);
  out.asymptotic_ok = std::abs(out.drop_lower - 1.92) <= 0.15 &&
                      std::abs(out.drop_upper - 1.92) <= 0.15;
  out.interval = profile_ci(values, row.estimate, ll_base, 0.05);
}

}  // namespace

// ---------------------------------------------------------------- grid

ProfileGrid build_candidate_grid(const EstimationResult& base, double gamma_a, double gamma_b,
                                 std::size_t points, CovarianceVariant se_variant) {
  if (points < 3) throw Error(ErrorKind::config, "profile grid needs at least 3 points");
  if (!(gamma_a < gamma_b) || !std::isfinite(gamma_a) || !std::isfinite(gamma_b)) {
    throw Error(ErrorKind::config, "profile grid needs finite gamma_a < gamma_b");
  }
  ProfileGrid grid;
  grid.se_variant = se_variant;
  grid.gamma.resize(points);
  const double span = static_cast<double>(points - 1);
  for (std::size_t m = 0; m < points; ++m) {
    const double w = static_cast<double>(m);
    grid.gamma[m] = ((span - w) * gamma_a + w * gamma_b) / span;
    if (grid.gamma[m] == 0.0) grid.zero_index = m;
  }

  const CovarianceEstimate* cov = nullptr;
  std::string missing;
  if (!base.covariance) {
    missing = "no covariance available";
  } else if (!base.covariance->get(se_variant).available) {
    missing = to_string(se_variant) + " covariance unavailable: " +
              base.covariance->get(se_variant).issue;
  } else {
    cov = &base.covariance->get(se_variant);
  }

  const auto free = base.estimates.free_indices();
  for (std::size_t k = 0; k < free.size(); ++k) {
    GridRow row;
    row.index = free[k];
    row.parameter = base.estimates[row.index].name;
    row.estimate = base.estimates[row.index].value;
    if (!cov) {
      row.skipped = true;
      row.warning = missing;
    } else {
      row.se = cov->se[static_cast<Eigen::Index>(k)];
      if (!(row.se > 0.0) || !std::isfinite(row.se)) {
        row.skipped = true;
        row.warning = "standard error of '" + row.parameter + "' is zero or undefined";
      }
    }
    if (!row.skipped) {
      row.candidates.resize(points);
      for (std::size_t m = 0; m < points; ++m) {
        row.candidates[m] = row.estimate + grid.gamma[m] * row.se;
      }
    }
    grid.rows.push_back(std::move(row));
  }
  return grid;
}

// ---------------------------------------------------------------- profile pass

ProfileRun run_profile(const ChoiceModel& model, const EstimationResult& base,
                       const ProfileGrid& grid, const ProfileSettings& settings) {
  if (!base.converged()) {
    throw Error(ErrorKind::contract, "profiling requires a converged base estimate");
  }
  ProfileRun run;
  run.grid = grid;
  const double ll_base = base.loglik;
  const std::size_t M = grid.gamma.size();
  run.report.base_loglik = ll_base;
  run.report.cells = grid.rows.size() * M;

  for (std::size_t k = 0; k < grid.rows.size(); ++k) {
    const GridRow& row = grid.rows[k];
    if (row.skipped) {
      run.report.skipped_cells += M;
      continue;
    }
    for (std::size_t m = 0; m < M; ++m) {
      ConstrainedFit f;
      f.row = k;
      f.m = m;
      f.parameter = row.parameter;
      f.gamma = grid.gamma[m];
      f.candidate = row.candidates[m];
      f.noop = m == grid.zero_index;
      run.fits.push_back(std::move(f));
    }
  }

  const LogLikelihoodFn fn = make_objective(model);
  parallel_for(run.fits.size(), settings.workers, [&](std::size_t i) {
    ConstrainedFit& f = run.fits[i];
    if (f.noop) {
      f.result = base;
      f.loglik = ll_base;
      f.converged = true;
      return;
    }
    try {
      f.result = maximize_constrained(fn, base.estimates, {{f.parameter, f.candidate}},
                                      settings.optimizer);
      f.loglik = f.result.loglik;
      f.converged = f.result.converged();
      f.improved = f.converged && f.loglik > ll_base + settings.improvement_tol;
    } catch (const Error& e) {
      f.failed = true;
      f.error = e.what();
    }
  });

  std::vector<std::vector<const ConstrainedFit*>> by_row(grid.rows.size());
  for (const auto& f : run.fits) {
    by_row[f.row].push_back(&f);
    if (!f.noop && !f.failed) ++run.report.estimations;
    if (f.failed) ++run.report.failures;
    if (f.improved) ++run.report.improvements;
  }
  for (std::size_t k = 0; k < grid.rows.size(); ++k) {
    ParameterProfileSummary s;
    s.parameter = grid.rows[k].parameter;
    if (grid.rows[k].skipped) {
      s.skipped = true;
      s.monotone = false;
    } else {
      summarize_row(grid.rows[k], by_row[k], ll_base, settings.improvement_tol, s);
    }
    run.report.parameters.push_back(std::move(s));
  }
  return run;
}

ProfileRun run_profile(const ChoiceModel& model, const EstimationResult& base,
                       const ProfileSettings& settings) {
  return run_profile(model, base,
                     build_candidate_grid(base, settings.gamma_a, settings.gamma_b,
                                          settings.points, settings.se_variant),
                     settings);
}

// ---------------------------------------------------------------- refinement

std::vector<RefinedSolution> refine_solutions(const ChoiceModel& model,
                                              const std::vector<const ConstrainedFit*>& fits,
                                              const ProfileSettings& settings) {
  std::vector<RefinedSolution> out(fits.size());
  const LogLikelihoodFn fn = make_objective(model);
  parallel_for(fits.size(), settings.workers, [&](std::size_t i) {
    RefinedSolution& r = out[i];
    r.source = fits[i];
    try {
      ParameterVector start = fits[i]->result.estimates;
      start.release(start.require_index(fits[i]->parameter));
      r.result = maximize(fn, start, settings.optimizer);
      r.ok = r.result.converged();
      if (!r.ok) r.error = "refinement ended with " + to_string(r.result.convergence.status);
    } catch (const Error& e) {
      r.error = e.what();
    }
  });
  return out;
}

// ---------------------------------------------------------------- canonical form

CanonicalForm canonicalize(const ParameterVector& params, const ModelSpec& spec,
                           bool antithetic_draws) {
  CanonicalForm out;
  out.params = params;
  const ParameterLayout lay(spec);
  if (params.size() != lay.size()) {
    throw Error(ErrorKind::spec, "parameters do not match the model layout");
  }
  switch (spec.family) {
    case ModelFamily::mnl:
      break;

    case ModelFamily::latent_class: {
      const std::size_t C = spec.classes;
      const std::size_t A = spec.attributes.size();
      std::vector<double> delta(C);
      double dmax = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < C; ++c) {
        delta[c] = params[lay.class_constant(c)].value;
        dmax = std::max(dmax, delta[c]);
      }
      std::vector<double> share(C);
      double total = 0.0;
      for (std::size_t c = 0; c < C; ++c) total += (share[c] = std::exp(delta[c] - dmax));
      for (auto& s : share) s /= total;
      std::vector<std::size_t> order(C);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (share[a] != share[b]) return share[a] > share[b];
        return params[lay.class_coefficient(0, a)].value < params[lay.class_coefficient(0, b)].value;
      });
      const double ref = delta[order[C - 1]];
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t src = order[c];
        if (src != c) out.changed = true;
        for (std::size_t a = 0; a < A; ++a) {
          out.params.set_value(lay.class_coefficient(a, c), params[lay.class_coefficient(a, src)].value);
        }
        const double d = c + 1 == C ? 0.0 : delta[src] - ref;
        if (d != params[lay.class_constant(c)].value) out.changed = true;
        out.params.set_value(lay.class_constant(c), d);
      }
      break;
    }

    case ModelFamily::mixed_logit_wtp: {
      const std::size_t K = spec.random.size();
      for (std::size_t e = 0; e < K; ++e) {
        if (!(params[lay.cholesky(e, e)].value < 0.0)) continue;
        out.changed = true;
        for (std::size_t d = e; d < K; ++d) {
          out.params.set_value(lay.cholesky(d, e), -params[lay.cholesky(d, e)].value);
        }
      }
      out.label_only = out.changed && !antithetic_draws;
      break;
    }
  }
  return out;
}

}  // namespace dcpl
