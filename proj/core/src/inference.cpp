#include "dcpl/inference.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>

#include "dcpl/distributions.hpp"
#include "dcpl/draws.hpp"
#include "dcpl/errors.hpp"

namespace dcpl {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double difference_step(double x) {
  const double h = std::cbrt(kEps) * std::max(1.0, std::abs(x));
  // Make x + h - x exact so the difference quotient uses the true step.
  volatile double xp = x + h;
  return xp - x;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Inverse of a symmetric matrix through its eigensystem.
Eigen::MatrixXd eigen_inverse(const HessianDiagnostics& eig) {
  const auto& Q = eig.eigenvectors;
  Eigen::MatrixXd scaled = Q;
  for (Eigen::Index i = 0; i < Q.cols(); ++i) scaled.col(i) /= eig.eigenvalues[i];
  return symmetrize(scaled * Q.transpose());
}

Eigen::VectorXd standard_errors(const Eigen::MatrixXd& omega) {
  Eigen::VectorXd se(omega.rows());
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    se[i] = omega(i, i) > 0.0 ? std::sqrt(omega(i, i)) : std::numeric_limits<double>::quiet_NaN();
  }
  return se;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- Hessian

Eigen::MatrixXd numerical_hessian(const LogLikelihoodFn& ll, const ParameterVector& at,
                                  double* asymmetry) {
  const auto free = at.free_indices();
  const auto K = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd H(K, K);
  Eigen::VectorXd gp;
  Eigen::VectorXd gm;
  for (Eigen::Index k = 0; k < K; ++k) {
    const std::size_t idx = free[static_cast<std::size_t>(k)];
    const double x = at[idx].value;
    const double h = difference_step(x);
    auto eval = [&](double value, Eigen::VectorXd& g) {
      ParameterVector p = at;
      p.set_value(idx, value);
      double f;
      try {
        f = ll(p, &g);
      } catch (const EvaluationError& e) {
        throw Error(ErrorKind::evaluation, "Hessian perturbation of '" + at[idx].name +
                                               "' failed: " + e.what());
      }
      if (!std::isfinite(f)) {
        throw Error(ErrorKind::evaluation,
                    "non-finite log-likelihood perturbing '" + at[idx].name + "'");
      }
      for (Eigen::Index l = 0; l < K; ++l) {
        if (!std::isfinite(g[l])) {
          throw Error(ErrorKind::evaluation,
                      "non-finite gradient at Hessian pair (" + at[idx].name + ", " +
                          at[free[static_cast<std::size_t>(l)]].name + ")");
        }
      }
    };
    eval(x + h, gp);
    eval(x - h, gm);
    H.col(k) = (gp - gm) / (2.0 * h);
  }
  if (asymmetry) *asymmetry = K > 0 ? (H - H.transpose()).cwiseAbs().maxCoeff() : 0.0;
  return symmetrize(H);
}

// ---------------------------------------------------------------- covariance

std::string to_string(CovarianceVariant v) {
  switch (v) {
    case CovarianceVariant::classical: return "classical";
    case CovarianceVariant::robust: return "robust";
    case CovarianceVariant::bhhh: return "bhhh";
  }
  return "unknown";
}

CovarianceVariant parse_covariance_variant(const std::string& text) {
  if (text == "classical") return CovarianceVariant::classical;
  if (text == "robust") return CovarianceVariant::robust;
  if (text == "bhhh") return CovarianceVariant::bhhh;
  throw Error(ErrorKind::config, "unknown covariance variant '" + text + "'");
}

const CovarianceEstimate& CovarianceSet::get(CovarianceVariant v) const {
  switch (v) {
    case CovarianceVariant::classical: return classical;
    case CovarianceVariant::robust: return robust;
    case CovarianceVariant::bhhh: return bhhh;
  }
  return classical;
}

const CovarianceEstimate& CovarianceSet::require(CovarianceVariant v) const {
  const auto& est = get(v);
  if (!est.available) {
    throw InversionError(to_string(v) + " covariance unavailable: " + est.issue, est.rcond);
  }
  return est;
}

Eigen::VectorXd CovarianceSet::t_ratios(CovarianceVariant v,
                                        const Eigen::VectorXd& estimates) const {
  return estimates.cwiseQuotient(require(v).se);
}

CovarianceSet covariance_estimates(const Eigen::MatrixXd& H, const Eigen::MatrixXd& scores,
                                   std::vector<std::string> names) {
  const auto K = H.rows();
  if (H.cols() != K || scores.cols() != K) {
    throw Error(ErrorKind::spec, "Hessian and score dimensions disagree");
  }
  CovarianceSet out;
  out.names = std::move(names);
  const double singular = static_cast<double>(std::max<Eigen::Index>(K, 1)) * kEps;

  const HessianDiagnostics hd = eigen_diagnostics(H);
  bool h_ok = false;
  Eigen::MatrixXd h_inv;
  out.classical.rcond = out.robust.rcond = hd.rcond;
  if (!hd.negative_definite) {
    out.classical.issue = out.robust.issue =
        "Hessian not negative definite (max eigenvalue " + format_number(hd.max_eigenvalue) + ")";
  } else if (hd.rcond < singular) {
    out.classical.issue = out.robust.issue = "Hessian singular (rcond " + format_number(hd.rcond) + ")";
  } else {
    h_ok = true;
    h_inv = eigen_inverse(hd);
  }

  const Eigen::MatrixXd B = symmetrize(scores.transpose() * scores);
  if (h_ok) {
    out.classical.matrix = -h_inv;
    out.classical.se = standard_errors(out.classical.matrix);
    out.classical.available = true;
    out.robust.matrix = symmetrize(h_inv * B * h_inv);
    out.robust.se = standard_errors(out.robust.matrix);
    out.robust.available = true;
  }

  const HessianDiagnostics bd = eigen_diagnostics(B);
  out.bhhh.rcond = bd.rcond;
  const double bmin = K > 0 ? bd.eigenvalues[0] : 0.0;
  if (K == 0 || !(bmin > 0.0)) {
    out.bhhh.issue = "outer product of scores not positive definite";
  } else if (bd.rcond < singular) {
    out.bhhh.issue = "outer product of scores singular (rcond " + format_number(bd.rcond) + ")";
  } else {
    out.bhhh.matrix = eigen_inverse(bd);
    out.bhhh.se = standard_errors(out.bhhh.matrix);
    out.bhhh.available = true;
  }
  return out;
}

// ---------------------------------------------------------------- eigensystem

HessianDiagnostics eigen_diagnostics(const Eigen::MatrixXd& H) {
  const auto K = H.rows();
  if (H.cols() != K) throw Error(ErrorKind::contract, "eigen_diagnostics needs a square matrix");
  const double scale = K > 0 ? H.cwiseAbs().maxCoeff() : 0.0;
  if (K > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(scale, 1e-300)) {
    throw Error(ErrorKind::contract, "eigen_diagnostics input is not symmetric");
  }
  if (K > 0 && !H.allFinite()) throw Error(ErrorKind::contract, "non-finite matrix entry");

  Eigen::MatrixXd A = symmetrize(H);
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(K, K);
  const double target = 1e-12 * A.norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < K; ++i) {
      for (Eigen::Index j = 0; j < K; ++j) {
        if (i != j) s += A(i, j) * A(i, j);
      }
    }
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < 100 && off_norm() > target; ++sweep) {
    for (Eigen::Index p = 0; p + 1 < K; ++p) {
      for (Eigen::Index q = p + 1; q < K; ++q) {
        if (A(p, q) == 0.0) continue;
        const double tau = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index i = 0; i < K; ++i) {
          const double aip = A(i, p);
          const double aiq = A(i, q);
          A(i, p) = c * aip - s * aiq;
          A(i, q) = s * aip + c * aiq;
          const double vip = V(i, p);
          const double viq = V(i, q);
          V(i, p) = c * vip - s * viq;
          V(i, q) = s * vip + c * viq;
        }
        for (Eigen::Index j = 0; j < K; ++j) {
          const double apj = A(p, j);
          const double aqj = A(q, j);
          A(p, j) = c * apj - s * aqj;
          A(q, j) = s * apj + c * aqj;
        }
        A(p, q) = A(q, p) = 0.0;
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });
  HessianDiagnostics out;
  out.eigenvalues.resize(K);
  out.eigenvectors.resize(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    out.eigenvalues[i] = A(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.eigenvectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
  }
  if (K == 0) return out;
  const double max_abs = out.eigenvalues.cwiseAbs().maxCoeff();
  const double min_abs = out.eigenvalues.cwiseAbs().minCoeff();
  out.max_eigenvalue = out.eigenvalues[K - 1];
  out.rcond = max_abs > 0.0 ? min_abs / max_abs : 0.0;
  out.negative_definite = max_abs > 0.0 && out.max_eigenvalue < -1e-8 * max_abs;
  out.ill_conditioned = out.rcond < kSqrtEpsilon;
  return out;
}

// ---------------------------------------------------------------- delta method

DeltaVectorResult delta_method(const VectorTransform& g, const Eigen::VectorXd& estimates,
                               const Eigen::MatrixXd& covariance) {
  const auto K = estimates.size();
  if (covariance.rows() != K || covariance.cols() != K) {
    throw Error(ErrorKind::spec, "delta method covariance dimension mismatch");
  }
  DeltaVectorResult out;
  out.values = g(estimates);
  out.jacobian.resize(out.values.size(), K);
  Eigen::VectorXd x = estimates;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double h = difference_step(estimates[k]);
    x[k] = estimates[k] + h;
    const Eigen::VectorXd up = g(x);
    x[k] = estimates[k] - h;
    const Eigen::VectorXd dn = g(x);
    x[k] = estimates[k];
    out.jacobian.col(k) = (up - dn) / (2.0 * h);
  }
  if (!out.jacobian.allFinite()) {
    throw Error(ErrorKind::degenerate_transform, "delta method Jacobian is not finite");
  }
  out.covariance = symmetrize(out.jacobian * covariance * out.jacobian.transpose());
  return out;
}

DeltaResult delta_method(const ScalarTransform& g, const Eigen::VectorXd& estimates,
                         const Eigen::MatrixXd& covariance) {
  const auto r = delta_method(
      VectorTransform([&g](const Eigen::VectorXd& b) {
        Eigen::VectorXd v(1);
        v[0] = g(b);
        return v;
      }),
      estimates, covariance);
  return {r.values[0], std::sqrt(std::max(0.0, r.covariance(0, 0)))};
}

ScalarTransform ratio_transform(std::size_t numerator, std::size_t denominator,
                                double multiplier) {
  return [=](const Eigen::VectorXd& b) {
    const double den = b[static_cast<Eigen::Index>(denominator)];
    if (std::abs(den) < 1e-12) {
      throw Error(ErrorKind::degenerate_transform, "ratio denominator within 1e-12 of zero");
    }
    return multiplier * b[static_cast<Eigen::Index>(numerator)] / den;
  };
}

// ---------------------------------------------------------------- intervals

double normal_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::domain, "alpha outside (0,1)");
  return -inv_normal_cdf(0.5 * alpha);
}

Interval wald_ci(double estimate, double se, double alpha) {
  const double z = normal_critical_value(alpha);
  return {estimate - z * se, estimate + z * se};
}

namespace {

// Root in [xa, xb] of the quadratic through three points, falling back to the
// chord between xa and xb when the quadratic has no root there.
double quadratic_crossing(const std::array<double, 3>& x, const std::array<double, 3>& f,
                          double xa, double fa, double xb, double fb) {
  const double d01 = (f[1] - f[0]) / (x[1] - x[0]);
  const double d12 = (f[2] - f[1]) / (x[2] - x[1]);
  const double d012 = (d12 - d01) / (x[2] - x[0]);
  // p(xa + u) = A u^2 + B u + C
  const double A = d012;
  const double B = d01 + d012 * (2.0 * xa - x[0] - x[1]);
  const double C = f[0] + d01 * (xa - x[0]) + d012 * (xa - x[0]) * (xa - x[1]);
  const double width = xb - xa;
  const double chord = xa + width * fa / (fa - fb);
  const double slack = 1e-9 * std::abs(width);
  auto inside = [&](double u) { return u >= -slack && u <= width + slack; };
  if (std::abs(A) * width * width <= 1e-14 * (std::abs(B) * width + std::abs(C))) {
    if (B == 0.0) return chord;
    const double u = -C / B;
    return inside(u) ? xa + u : chord;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return chord;
  const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  double best = chord;
  double best_dist = std::numeric_limits<double>::infinity();
  for (double u : {q / A, q != 0.0 ? C / q : std::numeric_limits<double>::quiet_NaN()}) {
    if (!std::isfinite(u) || !inside(u)) continue;
    const double dist = std::abs(xa + u - chord);
    if (dist < best_dist) {
      best = xa + std::clamp(u, 0.0, width);
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

ProfileInterval profile_ci(std::vector<ProfilePoint> curve, double estimate, double ll_max,
                           double alpha) {
  if (curve.empty()) throw Error(ErrorKind::spec, "profile_ci needs a non-empty curve");
  std::stable_sort(curve.begin(), curve.end(),
                   [](const ProfilePoint& a, const ProfilePoint& b) { return a.value < b.value; });
  const double z = normal_critical_value(alpha);
  const double cut = ll_max - 0.5 * z * z;
  const std::size_t n = curve.size();
  std::vector<double> f(n);
  std::vector<bool> ok(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = std::isfinite(curve[i].ll) ? curve[i].ll - cut : -std::numeric_limits<double>::infinity();
    ok[i] = f[i] >= 0.0;
  }

  // Accepted runs of consecutive curve points.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < n;) {
    if (!ok[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && ok[j + 1]) ++j;
    runs.emplace_back(i, j);
    i = j + 1;
  }
  ProfileInterval out;
  if (runs.empty()) {
    out.lower = out.upper = estimate;
    out.lower_open = out.upper_open = true;
    return out;
  }
  out.multimodal = runs.size() > 1;

  // The run containing the estimate; otherwise the widest run.
  std::size_t pick = runs.size();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const double lo = runs[r].first > 0 ? curve[runs[r].first - 1].value : -INFINITY;
    const double hi = runs[r].second + 1 < n ? curve[runs[r].second + 1].value : INFINITY;
    if (estimate > lo && estimate < hi) {
      pick = r;
      break;
    }
  }
  if (pick == runs.size()) {
    pick = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
      const auto w = [&](std::size_t k) {
        return curve[runs[k].second].value - curve[runs[k].first].value;
      };
      if (w(r) > w(pick)) pick = r;
    }
  }
  const auto [first, last] = runs[pick];

  auto three = [&](std::size_t a, std::size_t b) {
    // a, b adjacent bracketing indices; add the nearest third point.
    std::size_t c;
    if (a > 0 && std::isfinite(f[a - 1])) {
      c = a - 1;
    } else if (b + 1 < n && std::isfinite(f[b + 1])) {
      c = b + 1;
    } else {
      c = n;
    }
    return c;
  };
  auto crossing = [&](std::size_t a, std::size_t b) {
    const double xa = curve[a].value;
    const double xb = curve[b].value;
    if (!std::isfinite(f[a]) || !std::isfinite(f[b])) {
      return std::isfinite(f[a]) ? xa : xb;
    }
    const std::size_t c = three(a, b);
    if (c == n) return xa + (xb - xa) * f[a] / (f[a] - f[b]);
    std::array<std::size_t, 3> idx = {a, b, c};
    std::sort(idx.begin(), idx.end());
    return quadratic_crossing({curve[idx[0]].value, curve[idx[1]].value, curve[idx[2]].value},
                              {f[idx[0]], f[idx[1]], f[idx[2]]}, xa, f[a], xb, f[b]);
  };

  if (first == 0) {
    out.lower = curve[0].value;
    out.lower_open = true;
  } else {
    out.lower = crossing(first - 1, first);
  }
  if (last + 1 == n) {
    out.upper = curve[n - 1].value;
    out.upper_open = true;
  } else {
    out.upper = crossing(last, last + 1);
  }
  return out;
}

// ---------------------------------------------------------------- tests

TestResult lr_test(double ll_unrestricted, double ll_restricted, double df) {
  if (ll_unrestricted < ll_restricted - 1e-8) {
    throw Error(ErrorKind::ordering,
                "restricted log-likelihood exceeds the unrestricted one by more than 1e-8");
  }
  TestResult r;
  r.statistic = std::max(0.0, 2.0 * (ll_unrestricted - ll_restricted));
  r.p_value = chi2_sf(r.statistic, df);
  return r;
}

double bic(double ll, double parameters, double observations) {
  if (!(observations >= 1.0)) throw Error(ErrorKind::domain, "BIC needs at least one observation");
  return -2.0 * ll + parameters * std::log(observations);
}

BenAkivaSwaitResult ben_akiva_swait_test(double ll_1, double k_1, double ll_2, double k_2,
                                         double ll_null) {
  if (!(ll_null < 0.0)) throw Error(ErrorKind::domain, "null log-likelihood must be negative");
  BenAkivaSwaitResult r;
  r.rho_bar_1 = 1.0 - (ll_1 - k_1) / ll_null;
  r.rho_bar_2 = 1.0 - (ll_2 - k_2) / ll_null;
  const double diff = r.rho_bar_2 - r.rho_bar_1;
  if (diff < 0.0) {
    throw Error(ErrorKind::ordering, "model 2 must have the higher adjusted rho-bar squared");
  }
  r.argument = std::sqrt(std::max(0.0, -2.0 * diff * ll_null + (k_2 - k_1)));
  r.p_value = normal_sf(r.argument);
  r.log10_p = log_normal_sf(r.argument) / std::log(10.0);
  return r;
}

}  // namespace dcpl
