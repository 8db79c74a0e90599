#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dcpl/models.hpp"
#include "dcpl/parameters.hpp"

namespace dcpl {

// Hessian of the log-likelihood over the free parameters, from central
// differences of the analytic gradient with h_k = eps^(1/3) * max(1, |b_k|),
// symmetrized as (H + H')/2. When `asymmetry` is non-null it receives
// max |H - H'| before symmetrization.
Eigen::MatrixXd numerical_hessian(const LogLikelihoodFn& ll, const ParameterVector& at,
                                  double* asymmetry = nullptr);

enum class CovarianceVariant { classical, robust, bhhh };
std::string to_string(CovarianceVariant v);
CovarianceVariant parse_covariance_variant(const std::string& text);

struct CovarianceEstimate {
  bool available = false;
  std::string issue;  // violated definiteness / inversion condition when unavailable
  double rcond = 0.0; // of the matrix that had to be inverted
  Eigen::MatrixXd matrix;
  Eigen::VectorXd se;
};

struct CovarianceSet {
  std::vector<std::string> names;  // free parameters, in order
  CovarianceEstimate classical;    // -H^-1
  CovarianceEstimate robust;       // H^-1 B H^-1
  CovarianceEstimate bhhh;         // B^-1, B = sum_n s_n s_n'

  const CovarianceEstimate& get(CovarianceVariant v) const;
  // Throws InversionError (carrying rcond) when the variant is unavailable.
  const CovarianceEstimate& require(CovarianceVariant v) const;
  Eigen::VectorXd t_ratios(CovarianceVariant v, const Eigen::VectorXd& estimates) const;
};

// H: free-parameter Hessian of LL; scores: persons x free parameters.
CovarianceSet covariance_estimates(const Eigen::MatrixXd& H, const Eigen::MatrixXd& scores,
                                   std::vector<std::string> names = {});

struct HessianDiagnostics {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns match eigenvalues
  double max_eigenvalue = 0.0;
  double rcond = 0.0;            // min|lambda| / max|lambda|
  bool negative_definite = false;
  bool ill_conditioned = false;  // rcond below sqrt(machine epsilon)
};

inline constexpr double kSqrtEpsilon = 1.4901161193847656e-08;

// Cyclic Jacobi eigen-decomposition. Throws ErrorKind::contract if the input
// is not symmetric to 1e-8 (relative to its largest entry).
HessianDiagnostics eigen_diagnostics(const Eigen::MatrixXd& H);

using ScalarTransform = std::function<double(const Eigen::VectorXd&)>;
using VectorTransform = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct DeltaResult {
  double value = 0.0;
  double se = 0.0;
  double t_ratio() const { return value / se; }
};

struct DeltaVectorResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd jacobian;
};

// First-order propagation with a central-difference Jacobian.
DeltaResult delta_method(const ScalarTransform& g, const Eigen::VectorXd& estimates,
                         const Eigen::MatrixXd& covariance);
DeltaVectorResult delta_method(const VectorTransform& g, const Eigen::VectorXd& estimates,
                               const Eigen::MatrixXd& covariance);

// multiplier * b[numerator] / b[denominator]; evaluating it throws
// ErrorKind::degenerate_transform when |b[denominator]| < 1e-12.
ScalarTransform ratio_transform(std::size_t numerator, std::size_t denominator,
                                double multiplier = 1.0);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Two-sided critical value z_{1 - alpha/2}.
double normal_critical_value(double alpha);
Interval wald_ci(double estimate, double se, double alpha = 0.05);

struct ProfilePoint {
  double value = 0.0;  // candidate value of the profiled parameter
  double ll = 0.0;     // profile log-likelihood there
};

struct ProfileInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_open = false;  // crossing not bracketed by the curve
  bool upper_open = false;
  bool multimodal = false;  // acceptance set is disconnected
};

// {b : 2 (LL_max - LL_PL(b)) <= chi2_{1, 1-alpha}} as the widest contiguous
// interval containing `estimate`. Crossings are located by quadratic
// interpolation through the three nearest curve points.
ProfileInterval profile_ci(std::vector<ProfilePoint> curve, double estimate, double ll_max,
                           double alpha = 0.05);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

TestResult lr_test(double ll_unrestricted, double ll_restricted, double df);

// -2 LL + K ln N, N the number of choice tasks.
double bic(double ll, double parameters, double observations);

struct BenAkivaSwaitResult {
  double rho_bar_1 = 0.0;  // lower-fit model
  double rho_bar_2 = 0.0;  // better-fit model
  double argument = 0.0;   // z in p <= Phi(-z)
  double p_value = 0.5;    // may underflow to 0; see log10_p
  double log10_p = 0.0;
};

// Bound on the probability that model 1 (lower adjusted rho-bar squared) is
// the true model. ll_null is the equal-shares log-likelihood.
BenAkivaSwaitResult ben_akiva_swait_test(double ll_1, double k_1, double ll_2, double k_2,
                                         double ll_null);

}  // namespace dcpl
