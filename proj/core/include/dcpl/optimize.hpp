#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dcpl/inference.hpp"
#include "dcpl/models.hpp"
#include "dcpl/parameters.hpp"

namespace dcpl {

enum class ConvergenceStatus {
  relative_function_convergence,
  gradient_convergence,
  iteration_limit,
  line_search_failure,
  divergence_suspected,
};

std::string to_string(ConvergenceStatus status);

struct ConvergenceReport {
  ConvergenceStatus status = ConvergenceStatus::iteration_limit;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double gradient_max_norm = 0.0;
  double relative_step = 0.0;       // max |s_k| / max(1, |b_k|) of the last step
  std::vector<double> trajectory;   // LL at the start and after each accepted step
  std::vector<double> step_norms;   // Euclidean norm of each accepted step
  bool evaluation_only = false;     // no free parameters: LL evaluated, nothing optimized

  bool converged() const noexcept {
    return status == ConvergenceStatus::relative_function_convergence ||
           status == ConvergenceStatus::gradient_convergence;
  }
};

struct OptimizerSettings {
  double g_tol = 1e-6;     // max |grad| < g_tol * max(1, |LL|)
  double f_tol = 1e-10;    // predicted relative improvement 0.5 g'Hg / max(1, |LL|)
  std::size_t max_iterations = 500;
  double divergence_bound = 1e3;
  std::size_t max_line_search = 40;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
};

struct EstimationResult {
  ParameterVector estimates;
  double loglik = 0.0;
  ConvergenceReport convergence;
  std::optional<Eigen::MatrixXd> hessian;  // free-parameter Hessian when computed
  std::optional<CovarianceSet> covariance;
  std::optional<HessianDiagnostics> diagnostics;

  bool converged() const noexcept { return convergence.converged(); }
};

// BFGS on the free parameters with a strong-Wolfe line search. Fixed entries
// are copied through unchanged.
EstimationResult maximize(const LogLikelihoodFn& ll, const ParameterVector& start,
                          const OptimizerSettings& settings = {});

struct FixedValue {
  std::string name;
  double value = 0.0;
};

// Fixes the named entries at the given values, then maximizes over the rest.
EstimationResult maximize_constrained(const LogLikelihoodFn& ll, const ParameterVector& start,
                                      const std::vector<FixedValue>& fix,
                                      const OptimizerSettings& settings = {});

// Numerical Hessian, covariance trio and eigen diagnostics at the estimate.
// The model must be the one whose objective produced `result`.
void attach_inference(EstimationResult& result, const ChoiceModel& model);

}  // namespace dcpl
