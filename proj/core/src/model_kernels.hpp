#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>

#include "dcpl/errors.hpp"
#include "dcpl/models.hpp"

namespace dcpl::detail {

// log(sum exp(v)) with the maximum subtracted first.
inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

// Linear-in-parameters logit for one observation. Returns log P(chosen) and,
// when grad is non-null, adds d log P / d beta_a to grad[a]. `util` must hold
// at least J doubles. Throws EvaluationError on a non-finite utility.
inline double logit_task(const ChoiceDataset& ds, std::size_t obs,
                         std::span<const std::size_t> attrs, const double* beta, double* grad,
                         double* util, std::size_t person, std::size_t task) {
  const std::size_t J = ds.alternatives();
  double vmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < J; ++j) {
    double v = 0.0;
    for (std::size_t a = 0; a < attrs.size(); ++a) v += beta[a] * ds.x(obs, j, attrs[a]);
    if (!std::isfinite(v)) throw EvaluationError("non-finite utility", person, task);
    util[j] = v;
    vmax = std::max(vmax, v);
  }
  const auto y = static_cast<std::size_t>(ds.choice(obs));
  const double vy = util[y] - vmax;
  double denom = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    util[j] = std::exp(util[j] - vmax);
    denom += util[j];
  }
  const double lp = vy - std::log(denom);
  if (grad) {
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      double xbar = 0.0;
      for (std::size_t j = 0; j < J; ++j) xbar += util[j] * ds.x(obs, j, attrs[a]);
      grad[a] += ds.x(obs, y, attrs[a]) - xbar / denom;
    }
  }
  return lp;
}

std::unique_ptr<ChoiceModel> make_mnl_model(const ModelSpec& spec,
                                            std::shared_ptr<const ChoiceDataset> data);
std::unique_ptr<ChoiceModel> make_latent_class_model(const ModelSpec& spec,
                                                     std::shared_ptr<const ChoiceDataset> data);
std::unique_ptr<ChoiceModel> make_mixed_logit_model(const ModelSpec& spec,
                                                    std::shared_ptr<const ChoiceDataset> data,
                                                    std::shared_ptr<const DrawMatrix> draws);

}  // namespace dcpl::detail
