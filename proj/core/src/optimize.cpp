#include "dcpl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcpl/errors.hpp"

namespace dcpl {

std::string to_string(ConvergenceStatus status) {
  switch (status) {
    case ConvergenceStatus::relative_function_convergence: return "relative-function-convergence";
    case ConvergenceStatus::gradient_convergence: return "gradient-convergence";
    case ConvergenceStatus::iteration_limit: return "iteration-limit";
    case ConvergenceStatus::line_search_failure: return "line-search-failure";
    case ConvergenceStatus::divergence_suspected: return "divergence-suspected";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimization view of -LL over the free sub-vector.
class Problem {
 public:
  Problem(const LogLikelihoodFn& ll, ParameterVector base)
      : ll_(ll), params_(std::move(base)) {}

  // Returns +inf (and leaves g untouched) when the likelihood cannot be
  // evaluated at x.
  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    ++evaluations;
    params_.set_free_values(x);
    double f;
    try {
      f = -ll_(params_, &g);
    } catch (const EvaluationError&) {
      return kInf;
    }
    if (!std::isfinite(f) || !g.allFinite()) return kInf;
    g = -g;
    return f;
  }

  const ParameterVector& params() const { return params_; }
  ParameterVector at(const Eigen::VectorXd& x) {
    params_.set_free_values(x);
    return params_;
  }

  std::size_t evaluations = 0;

 private:
  const LogLikelihoodFn& ll_;
  ParameterVector params_;
};

struct LinePoint {
  double alpha = 0.0;
  double f = kInf;
  double d = 0.0;  // directional derivative
  Eigen::VectorXd g;
};

// Minimizer of the cubic through two points with derivatives, safeguarded to
// the interior of [lo, hi]; bisection when the cubic is unusable.
double interpolate(const LinePoint& lo, const LinePoint& hi) {
  const double a = lo.alpha;
  const double b = hi.alpha;
  const double left = std::min(a, b);
  const double right = std::max(a, b);
  const double margin = 0.1 * (right - left);
  double t = 0.5 * (a + b);
  if (std::isfinite(hi.f) && std::isfinite(lo.f)) {
    const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (a - b);
    const double rad = d1 * d1 - lo.d * hi.d;
    if (rad >= 0.0) {
      const double d2 = std::copysign(std::sqrt(rad), b - a);
      const double denom = hi.d - lo.d + 2.0 * d2;
      if (denom != 0.0) {
        const double c = b - (b - a) * (hi.d + d2 - d1) / denom;
        if (std::isfinite(c)) t = c;
      }
    }
  }
  return std::clamp(t, left + margin, right - margin);
}

struct LineResult {
  bool ok = false;
  LinePoint point;
};

LineResult strong_wolfe(Problem& prob, const Eigen::VectorXd& x, double f0,
                        const Eigen::VectorXd& g0, const Eigen::VectorXd& dir, double alpha0,
                        const OptimizerSettings& s) {
  const double d0 = g0.dot(dir);
  const double c1 = s.wolfe_c1;
  const double c2 = s.wolfe_c2;
  auto eval = [&](double alpha) {
    LinePoint p;
    p.alpha = alpha;
    p.g.resize(x.size());
    p.f = prob(x + alpha * dir, p.g);
    p.d = std::isfinite(p.f) ? p.g.dot(dir) : 0.0;
    return p;
  };
  std::size_t budget = s.max_line_search;

  auto zoom = [&](LinePoint lo, LinePoint hi) -> LineResult {
    while (budget-- > 0) {
      const double alpha = interpolate(lo, hi);
      if (alpha == lo.alpha || alpha == hi.alpha) break;
      LinePoint p = eval(alpha);
      if (!(p.f <= f0 + c1 * alpha * d0) || p.f >= lo.f) {
        hi = std::move(p);
      } else {
        if (std::abs(p.d) <= -c2 * d0) return {true, std::move(p)};
        if (p.d * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(p);
      }
    }
    // Interval exhausted: accept the best sufficient-decrease point found.
    if (lo.alpha > 0.0) return {true, std::move(lo)};
    return {false, std::move(lo)};
  };

  LinePoint prev;
  prev.alpha = 0.0;
  prev.f = f0;
  prev.d = d0;
  prev.g = g0;
  double alpha = alpha0;
  bool first = true;
  while (budget-- > 0) {
    LinePoint p = eval(alpha);
    if (!(p.f <= f0 + c1 * alpha * d0) || (!first && p.f >= prev.f)) {
      return zoom(std::move(prev), std::move(p));
    }
    if (std::abs(p.d) <= -c2 * d0) return {true, std::move(p)};
    if (p.d >= 0.0) return zoom(std::move(p), std::move(prev));
    prev = std::move(p);
    alpha *= 2.0;
    first = false;
  }
  if (prev.alpha > 0.0) return {true, std::move(prev)};
  return {false, std::move(prev)};
}

}  // namespace

EstimationResult maximize(const LogLikelihoodFn& ll, const ParameterVector& start,
                          const OptimizerSettings& settings) {
  EstimationResult res;
  Problem prob(ll, start);
  const std::size_t K = start.free_count();
  Eigen::VectorXd x = start.free_values();
  Eigen::VectorXd g(static_cast<Eigen::Index>(K));
  double f;
  try {
    ++prob.evaluations;
    f = -ll(start, &g);
  } catch (const EvaluationError& e) {
    throw Error(ErrorKind::start_point, std::string("log-likelihood not finite at start: ") + e.what());
  }
  if (!std::isfinite(f) || !g.allFinite()) {
    throw Error(ErrorKind::start_point, "log-likelihood not finite at start");
  }
  g = -g;

  ConvergenceReport& rep = res.convergence;
  rep.trajectory.push_back(-f);
  auto finish = [&](ConvergenceStatus status) {
    rep.status = status;
    rep.evaluations = prob.evaluations;
    rep.gradient_max_norm = K > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
    res.estimates = prob.at(x);
    res.loglik = -f;
    return res;
  };

  if (K == 0) {
    rep.evaluation_only = true;
    return finish(ConvergenceStatus::gradient_convergence);
  }

  const auto n = static_cast<Eigen::Index>(K);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  for (std::size_t iter = 0;; ++iter) {
    const double fscale = std::max(1.0, std::abs(f));
    if (g.cwiseAbs().maxCoeff() < settings.g_tol * fscale) {
      return finish(ConvergenceStatus::gradient_convergence);
    }
    if (iter > 0 && 0.5 * g.dot(H * g) / fscale < settings.f_tol) {
      return finish(ConvergenceStatus::relative_function_convergence);
    }
    if (iter >= settings.max_iterations) return finish(ConvergenceStatus::iteration_limit);

    Eigen::VectorXd dir = -H * g;
    if (!(g.dot(dir) < 0.0)) {
      H.setIdentity();
      scaled = false;
      dir = -g;
    }
    const double alpha0 = iter == 0 ? std::min(1.0, 1.0 / g.cwiseAbs().maxCoeff()) : 1.0;
    LineResult ls = strong_wolfe(prob, x, f, g, dir, alpha0, settings);
    if (!ls.ok && scaled) {
      // Retry once along steepest descent with a fresh metric.
      H.setIdentity();
      scaled = false;
      dir = -g;
      ls = strong_wolfe(prob, x, f, g, dir, std::min(1.0, 1.0 / g.cwiseAbs().maxCoeff()),
                        settings);
    }
    if (!ls.ok) return finish(ConvergenceStatus::line_search_failure);

    const Eigen::VectorXd step = ls.point.alpha * dir;
    const Eigen::VectorXd y = ls.point.g - g;
    x += step;
    f = ls.point.f;
    g = ls.point.g;
    rep.iterations = iter + 1;
    rep.trajectory.push_back(-f);
    rep.step_norms.push_back(step.norm());
    double rel = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      rel = std::max(rel, std::abs(step[i]) / std::max(1.0, std::abs(x[i])));
    }
    rep.relative_step = rel;

    if (x.cwiseAbs().maxCoeff() > settings.divergence_bound) {
      return finish(ConvergenceStatus::divergence_suspected);
    }

    const double sy = step.dot(y);
    if (sy > 1e-10 * step.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      const double yHy = y.dot(Hy);
      // H+ = (I - rho s y') H (I - rho y s') + rho s s'
      H += (rho * rho * yHy + rho) * step * step.transpose() -
           rho * (Hy * step.transpose() + step * Hy.transpose());
      H = 0.5 * (H + H.transpose()).eval();
    }
  }
}

EstimationResult maximize_constrained(const LogLikelihoodFn& ll, const ParameterVector& start,
                                      const std::vector<FixedValue>& fix,
                                      const OptimizerSettings& settings) {
  ParameterVector p = start;
  for (const auto& fv : fix) {
    const auto idx = p.index_of(fv.name);
    if (!idx) throw Error(ErrorKind::spec, "cannot fix unknown parameter '" + fv.name + "'");
    p.fix(*idx, fv.value);
  }
  return maximize(ll, p, settings);
}

void attach_inference(EstimationResult& result, const ChoiceModel& model) {
  const LogLikelihoodFn fn = make_objective(model);
  Eigen::MatrixXd H = numerical_hessian(fn, result.estimates);
  const auto ev = model.evaluate(result.estimates, EvalDetail::scores);
  result.covariance = covariance_estimates(H, ev.scores, result.estimates.free_names());
  result.diagnostics = eigen_diagnostics(H);
  result.hessian = std::move(H);
}

}  // namespace dcpl
