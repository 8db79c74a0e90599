#include "dcpl/wtp.hpp"

#include <cmath>
#include <limits>

#include "dcpl/errors.hpp"
#include "dcpl/inference.hpp"

namespace dcpl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double checked_ratio(double num, double den) {
  if (std::abs(den) < 1e-12) {
    throw Error(ErrorKind::degenerate_transform, "valuation denominator within 1e-12 of zero");
  }
  return num / den;
}

Eigen::VectorXd class_shares(const ParameterLayout& lay, std::size_t C, const Eigen::VectorXd& v) {
  Eigen::VectorXd pi(static_cast<Eigen::Index>(C));
  double dmax = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < C; ++c) dmax = std::max(dmax, v[static_cast<Eigen::Index>(lay.class_constant(c))]);
  for (std::size_t c = 0; c < C; ++c) {
    pi[static_cast<Eigen::Index>(c)] = std::exp(v[static_cast<Eigen::Index>(lay.class_constant(c))] - dmax);
  }
  return pi / pi.sum();
}

std::size_t attribute_position(const ModelSpec& spec, const std::string& name) {
  for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
    if (spec.attributes[a] == name) return a;
  }
  throw Error(ErrorKind::config, "valuation refers to unknown attribute '" + name + "'");
}

std::size_t random_position(const ModelSpec& spec, const std::string& name) {
  for (std::size_t d = 0; d < spec.random.size(); ++d) {
    if (spec.random[d].name == name) return d;
  }
  throw Error(ErrorKind::config, "valuation refers to unknown random coefficient '" + name + "'");
}

}  // namespace

const WtpEntry& WtpReport::at(const std::string& quantity) const {
  for (const auto& e : entries) {
    if (e.quantity == quantity) return e;
  }
  throw Error(ErrorKind::spec, "no valuation entry '" + quantity + "'");
}

LognormalMoments lognormal_moments(const ModelSpec& spec, const Eigen::VectorXd& values) {
  const ParameterLayout lay(spec);
  const std::size_t K = spec.random.size();
  const auto k = static_cast<Eigen::Index>(K);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd mu(k);
  Eigen::VectorXd sign(k);
  for (std::size_t d = 0; d < K; ++d) {
    mu[static_cast<Eigen::Index>(d)] = values[static_cast<Eigen::Index>(lay.mean(d))];
    sign[static_cast<Eigen::Index>(d)] = spec.random[d].sign == LognormalSign::negative ? -1.0 : 1.0;
    for (std::size_t e = 0; e <= d; ++e) {
      L(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(e)) =
          values[static_cast<Eigen::Index>(lay.cholesky(d, e))];
    }
  }
  const Eigen::MatrixXd S = L * L.transpose();
  LognormalMoments m;
  m.mean.resize(k);
  m.sd.resize(k);
  m.correlation = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index d = 0; d < k; ++d) {
    const double scale = std::exp(mu[d] + 0.5 * S(d, d));
    m.mean[d] = sign[d] * scale;
    m.sd[d] = scale * std::sqrt(std::expm1(S(d, d)));
  }
  for (Eigen::Index d = 0; d < k; ++d) {
    for (Eigen::Index e = 0; e < d; ++e) {
      const double denom = std::sqrt(std::expm1(S(d, d)) * std::expm1(S(e, e)));
      const double r = denom > 0.0 ? sign[d] * sign[e] * std::expm1(S(d, e)) / denom : kNaN;
      m.correlation(d, e) = m.correlation(e, d) = r;
    }
  }
  return m;
}

WtpReport wtp_report(const ModelSpec& spec, const ParameterVector& estimates,
                     const Eigen::MatrixXd& covariance,
                     const std::vector<WtpDefinition>& definitions) {
  const ParameterLayout lay(spec);
  if (estimates.size() != lay.size()) {
    throw Error(ErrorKind::spec, "estimates do not match the model layout");
  }
  const Eigen::VectorXd free = estimates.free_values();
  const bool have_cov = covariance.size() > 0;
  if (have_cov && (covariance.rows() != free.size() || covariance.cols() != free.size())) {
    throw Error(ErrorKind::spec, "covariance does not match the free parameters");
  }
  auto full = [&estimates](const Eigen::VectorXd& fv) {
    ParameterVector p = estimates;
    p.set_free_values(fv);
    return p.values();
  };

  WtpReport rep;
  auto add = [&](std::string quantity, std::string unit,
                 const std::function<double(const Eigen::VectorXd&)>& g) {
    WtpEntry e;
    e.quantity = std::move(quantity);
    e.unit = std::move(unit);
    auto on_free = [&](const Eigen::VectorXd& fv) { return g(full(fv)); };
    if (have_cov) {
      const DeltaResult d = delta_method(ScalarTransform(on_free), free, covariance);
      e.estimate = d.value;
      e.se = d.se;
    } else {
      e.estimate = on_free(free);
      e.se = kNaN;
    }
    e.t_ratio = e.estimate / e.se;
    rep.entries.push_back(std::move(e));
  };

  switch (spec.family) {
    case ModelFamily::mnl:
      for (const auto& def : definitions) {
        const auto a = static_cast<Eigen::Index>(lay.coefficient(attribute_position(spec, def.attribute)));
        const auto c = static_cast<Eigen::Index>(lay.coefficient(attribute_position(spec, def.cost)));
        add(def.name, def.unit, [=](const Eigen::VectorXd& v) {
          return def.multiplier * checked_ratio(v[a], v[c]);
        });
      }
      break;

    case ModelFamily::latent_class: {
      const std::size_t C = spec.classes;
      for (std::size_t c = 0; c < C; ++c) {
        add("pi[class " + std::to_string(c + 1) + "]", "",
            [&lay, C, c](const Eigen::VectorXd& v) {
              return class_shares(lay, C, v)[static_cast<Eigen::Index>(c)];
            });
      }
      for (const auto& def : definitions) {
        const std::size_t a = attribute_position(spec, def.attribute);
        const std::size_t k = attribute_position(spec, def.cost);
        auto class_values = [&lay, C, a, k, m = def.multiplier](const Eigen::VectorXd& v) {
          Eigen::VectorXd out(static_cast<Eigen::Index>(C));
          for (std::size_t c = 0; c < C; ++c) {
            out[static_cast<Eigen::Index>(c)] =
                m * checked_ratio(v[static_cast<Eigen::Index>(lay.class_coefficient(a, c))],
                                  v[static_cast<Eigen::Index>(lay.class_coefficient(k, c))]);
          }
          return out;
        };
        for (std::size_t c = 0; c < C; ++c) {
          add(def.name + "[class " + std::to_string(c + 1) + "]", def.unit,
              [class_values, c](const Eigen::VectorXd& v) {
                return class_values(v)[static_cast<Eigen::Index>(c)];
              });
        }
        add(def.name + " mean", def.unit, [&lay, C, class_values](const Eigen::VectorXd& v) {
          return class_shares(lay, C, v).dot(class_values(v));
        });
        add(def.name + " sd", def.unit, [&lay, C, class_values](const Eigen::VectorXd& v) {
          const Eigen::VectorXd pi = class_shares(lay, C, v);
          const Eigen::VectorXd w = class_values(v);
          const double mean = pi.dot(w);
          return std::sqrt(std::max(0.0, pi.dot(w.cwiseProduct(w)) - mean * mean));
        });
      }
      break;
    }

    case ModelFamily::mixed_logit_wtp: {
      for (const auto& def : definitions) {
        const auto d = static_cast<Eigen::Index>(random_position(spec, def.attribute));
        const double m = def.multiplier;
        add(def.name + " mean", def.unit, [&spec, d, m](const Eigen::VectorXd& v) {
          return m * lognormal_moments(spec, v).mean[d];
        });
        add(def.name + " sd", def.unit, [&spec, d, m](const Eigen::VectorXd& v) {
          return std::abs(m) * lognormal_moments(spec, v).sd[d];
        });
      }
      const std::size_t K = spec.random.size();
      for (std::size_t d = 0; d < K; ++d) {
        for (std::size_t e = d + 1; e < K; ++e) {
          add("rho(" + spec.random[d].name + "," + spec.random[e].name + ")", "",
              [&spec, d, e](const Eigen::VectorXd& v) {
                return lognormal_moments(spec, v).correlation(static_cast<Eigen::Index>(d),
                                                              static_cast<Eigen::Index>(e));
              });
        }
      }
      rep.note = "population moments from analytic lognormal identities";
      break;
    }
  }
  return rep;
}

}  // namespace dcpl
