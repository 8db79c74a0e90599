#pragma once

// Reference computations written independently of the library code paths
// they check.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include <dcpl/data.hpp>
#include <dcpl/parameters.hpp>

namespace dcpltest {

// Portable uniform on (0, 1) from raw 64-bit engine output. Unlike
// std::uniform_real_distribution its values do not depend on the standard
// library implementation.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();  // Box-Muller, one value per call

 private:
  std::mt19937_64 engine_;
};

// Phi(z) from the positive-term power series of erf; valid for |z| <= 6.
double series_normal_cdf(double z);

// Phi^-1(u) by bisection on series_normal_cdf.
double bisect_normal_quantile(double u);

// First `count` points of the dimension-1 Sobol sequence built by hand from
// Gray-code bit flips of the direction numbers v_k = 2^-k (origin skipped).
std::vector<double> gray_code_sobol_dim1(std::size_t count);

// Closed-form linear-in-parameters MNL quantities over all observations.
struct MnlClosedForm {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;        // -sum p_j (x_j - xbar)(x_j - xbar)'
  Eigen::MatrixXd person_scores;  // persons x attributes
};
MnlClosedForm mnl_closed_form(const dcpl::ChoiceDataset& ds, const Eigen::VectorXd& beta);

using ScalarObjective = std::function<double(const dcpl::ParameterVector&)>;

// Central differences over the free entries, h = rel_step * max(1, |b_k|).
Eigen::VectorXd finite_difference_gradient(const ScalarObjective& f,
                                           const dcpl::ParameterVector& at,
                                           double rel_step = 1e-6);

// max_k |a_k - b_k| / max(1, |b_k|)
double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Sample standard deviation.
double sample_sd(const std::vector<double>& x);

}  // namespace dcpltest
