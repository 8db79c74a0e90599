#include "dcpl/synthesize.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "dcpl/draws.hpp"
#include "dcpl/errors.hpp"

namespace dcpl {
namespace {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : gen_(seed) {}
  // Midpoint of a 53-bit cell, so the result is strictly inside (0,1).
  double operator()() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

std::size_t sample_index(const std::vector<double>& weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
    acc += weights[j] / total;
    if (u < acc) return j;
  }
  return weights.size() - 1;
}

// exp(v - max) for one choice situation.
void softmax_weights(std::vector<double>& v) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (double x : v) vmax = std::max(vmax, x);
  for (double& x : v) x = std::exp(x - vmax);
}

}  // namespace

ChoiceDataset synthesize_dataset(const ParameterVector& true_params,
                                 const SyntheticDesign& design, const ModelSpec& model,
                                 std::uint64_t seed) {
  model.validate();
  const ParameterLayout layout(model);
  const ParameterVector tmpl = layout.template_parameters();
  if (true_params.size() != tmpl.size()) {
    throw Error(ErrorKind::spec, "true parameters have " + std::to_string(true_params.size()) +
                                     " entries, model expects " + std::to_string(tmpl.size()));
  }
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (true_params[i].name != tmpl[i].name) {
      throw Error(ErrorKind::spec, "true parameter " + std::to_string(i) + " is '" +
                                       true_params[i].name + "', expected '" + tmpl[i].name +
                                       "'");
    }
  }
  if (design.alternatives < 2 || design.persons == 0 || design.tasks_per_person == 0) {
    throw Error(ErrorKind::spec, "design needs >= 2 alternatives, persons and tasks");
  }
  std::vector<std::string> names;
  for (const auto& a : design.attributes) {
    if (!(a.low <= a.high) || !std::isfinite(a.low) || !std::isfinite(a.high)) {
      throw Error(ErrorKind::spec, "invalid range for attribute '" + a.name + "'");
    }
    names.push_back(a.name);
  }
  auto find_attr = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return i;
    }
    throw Error(ErrorKind::spec, "model attribute '" + name + "' missing from design");
  };

  const std::size_t N = design.persons;
  const std::size_t T = design.tasks_per_person;
  const std::size_t J = design.alternatives;
  const std::size_t A = names.size();
  Uniform uniform(seed);

  std::vector<double> x(N * T * J * A);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& r = design.attributes[i % A];
    x[i] = r.low + (r.high - r.low) * uniform();
  }
  auto X = [&](std::size_t obs, std::size_t j, std::size_t a) {
    return x[(obs * J + j) * A + a];
  };

  // Per-person linear coefficients on design attributes; mixed logit is
  // handled separately because its utility is not linear in the draws.
  std::vector<int> choices(N * T);
  std::vector<double> v(J);
  const Eigen::VectorXd theta = true_params.values();

  for (std::size_t n = 0; n < N; ++n) {
    std::vector<double> coef(A, 0.0);
    std::vector<double> wtp(A, 0.0);
    std::size_t scale_attr = 0;
    double scale = 0.0;
    switch (model.family) {
      case ModelFamily::mnl:
        for (std::size_t a = 0; a < model.attributes.size(); ++a) {
          coef[find_attr(model.attributes[a])] = theta[static_cast<Eigen::Index>(layout.coefficient(a))];
        }
        break;
      case ModelFamily::latent_class: {
        std::vector<double> pi(model.classes);
        double dmax = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < model.classes; ++c) {
          pi[c] = theta[static_cast<Eigen::Index>(layout.class_constant(c))];
          dmax = std::max(dmax, pi[c]);
        }
        for (double& p : pi) p = std::exp(p - dmax);
        const std::size_t cls = sample_index(pi, uniform());
        for (std::size_t a = 0; a < model.attributes.size(); ++a) {
          coef[find_attr(model.attributes[a])] =
              theta[static_cast<Eigen::Index>(layout.class_coefficient(a, cls))];
        }
        break;
      }
      case ModelFamily::mixed_logit_wtp: {
        const std::size_t K = model.random.size();
        std::vector<double> z(K);
        for (auto& zi : z) zi = inv_normal_cdf(uniform());
        for (std::size_t d = 0; d < K; ++d) {
          double u = theta[static_cast<Eigen::Index>(layout.mean(d))];
          for (std::size_t e = 0; e <= d; ++e) {
            u += theta[static_cast<Eigen::Index>(layout.cholesky(d, e))] * z[e];
          }
          const double sign = model.random[d].sign == LognormalSign::negative ? -1.0 : 1.0;
          const std::size_t a = find_attr(model.random[d].attribute);
          if (d == model.scale_index()) {
            scale = sign * std::exp(u);
            scale_attr = a;
          } else {
            wtp[a] = sign * std::exp(u);
          }
        }
        break;
      }
    }
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t obs = n * T + t;
      for (std::size_t j = 0; j < J; ++j) {
        double u = 0.0;
        if (model.family == ModelFamily::mixed_logit_wtp) {
          double inner = X(obs, j, scale_attr);
          for (std::size_t a = 0; a < A; ++a) inner += wtp[a] * X(obs, j, a);
          u = scale * inner;
        } else {
          for (std::size_t a = 0; a < A; ++a) u += coef[a] * X(obs, j, a);
        }
        v[j] = u;
      }
      softmax_weights(v);
      choices[obs] = static_cast<int>(sample_index(v, uniform()));
    }
  }

  std::vector<std::string> ids(N);
  for (std::size_t n = 0; n < N; ++n) ids[n] = std::to_string(n + 1);
  return ChoiceDataset(names, J, std::move(ids), std::vector<std::size_t>(N, T), std::move(x),
                       std::move(choices));
}

}  // namespace dcpl
