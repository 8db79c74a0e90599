#include "dcpl/models.hpp"

#include <cmath>
#include <set>

#include "dcpl/errors.hpp"
#include "model_kernels.hpp"

namespace dcpl {

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::mnl: return "mnl";
    case ModelFamily::latent_class: return "latent_class";
    case ModelFamily::mixed_logit_wtp: return "mixed_logit_wtp";
  }
  return "unknown";
}

ModelFamily parse_model_family(const std::string& text) {
  if (text == "mnl") return ModelFamily::mnl;
  if (text == "latent_class" || text == "lc") return ModelFamily::latent_class;
  if (text == "mixed_logit_wtp" || text == "mmnl") return ModelFamily::mixed_logit_wtp;
  throw Error(ErrorKind::config, "unknown model family '" + text + "'");
}

ModelSpec ModelSpec::mnl(std::vector<std::string> attributes) {
  ModelSpec s;
  s.family = ModelFamily::mnl;
  s.attributes = std::move(attributes);
  s.validate();
  return s;
}

ModelSpec ModelSpec::latent_class(std::vector<std::string> attributes, std::size_t classes) {
  ModelSpec s;
  s.family = ModelFamily::latent_class;
  s.attributes = std::move(attributes);
  s.classes = classes;
  s.validate();
  return s;
}

ModelSpec ModelSpec::mixed_logit_wtp(std::vector<RandomCoefficient> random,
                                     std::string scale_coefficient) {
  ModelSpec s;
  s.family = ModelFamily::mixed_logit_wtp;
  s.random = std::move(random);
  s.scale_coefficient = std::move(scale_coefficient);
  s.validate();
  return s;
}

namespace {
void require_unique(const std::vector<std::string>& names, const char* what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw Error(ErrorKind::spec, std::string("empty ") + what + " name");
    if (!seen.insert(n).second) {
      throw Error(ErrorKind::spec, std::string("duplicate ") + what + " '" + n + "'");
    }
  }
}
}  // namespace

void ModelSpec::validate() const {
  switch (family) {
    case ModelFamily::mnl:
      if (attributes.empty()) throw Error(ErrorKind::spec, "MNL needs at least one attribute");
      require_unique(attributes, "attribute");
      break;
    case ModelFamily::latent_class:
      if (attributes.empty()) throw Error(ErrorKind::spec, "LC needs at least one attribute");
      if (classes < 2) throw Error(ErrorKind::spec, "LC needs at least 2 classes");
      require_unique(attributes, "attribute");
      break;
    case ModelFamily::mixed_logit_wtp: {
      if (random.empty()) throw Error(ErrorKind::spec, "mixed logit needs random coefficients");
      if (random.size() > kMaxSobolDimension) {
        throw Error(ErrorKind::spec, "too many random coefficients");
      }
      std::vector<std::string> names;
      std::vector<std::string> attrs;
      for (const auto& r : random) {
        names.push_back(r.name);
        attrs.push_back(r.attribute);
      }
      require_unique(names, "random coefficient");
      require_unique(attrs, "attribute");
      (void)scale_index();
      break;
    }
  }
}

std::size_t ModelSpec::scale_index() const {
  for (std::size_t d = 0; d < random.size(); ++d) {
    if (random[d].name == scale_coefficient) return d;
  }
  throw Error(ErrorKind::spec, "scale coefficient '" + scale_coefficient +
                                   "' is not a random coefficient");
}

// ---------------------------------------------------------------- layout

ParameterLayout::ParameterLayout(const ModelSpec& spec) : spec_(spec) {
  spec_.validate();
  switch (spec_.family) {
    case ModelFamily::mnl:
      attributes_ = spec_.attributes.size();
      size_ = attributes_;
      break;
    case ModelFamily::latent_class:
      attributes_ = spec_.attributes.size();
      classes_ = spec_.classes;
      size_ = attributes_ * classes_ + classes_;
      break;
    case ModelFamily::mixed_logit_wtp: {
      const std::size_t k = spec_.random.size();
      size_ = k + packed_lower_size(k);
      break;
    }
  }
}

ParameterVector ParameterLayout::template_parameters() const {
  std::vector<Parameter> p(size_);
  switch (spec_.family) {
    case ModelFamily::mnl:
      for (std::size_t a = 0; a < attributes_; ++a) p[a].name = "b_" + spec_.attributes[a];
      break;
    case ModelFamily::latent_class:
      for (std::size_t a = 0; a < attributes_; ++a) {
        for (std::size_t c = 0; c < classes_; ++c) {
          p[class_coefficient(a, c)].name =
              "b_" + spec_.attributes[a] + "_" + std::to_string(c + 1);
        }
      }
      for (std::size_t c = 0; c < classes_; ++c) {
        p[class_constant(c)].name = "delta_" + std::to_string(c + 1);
      }
      p[class_constant(classes_ - 1)].fixed = true;
      break;
    case ModelFamily::mixed_logit_wtp: {
      const auto& r = spec_.random;
      for (std::size_t d = 0; d < r.size(); ++d) {
        p[mean(d)].name = "mu_" + r[d].name;
        for (std::size_t e = 0; e < d; ++e) {
          p[cholesky(d, e)].name = "c_" + r[e].name + "_" + r[d].name;
        }
        p[cholesky(d, d)].name = "c_" + r[d].name;
      }
      break;
    }
  }
  return ParameterVector(std::move(p));
}

// ---------------------------------------------------------------- evaluation

LikelihoodEvaluation total_loglikelihood(const Eigen::VectorXd& person_loglik,
                                         const Eigen::MatrixXd& person_scores,
                                         const ParameterVector& params, EvalDetail detail) {
  LikelihoodEvaluation out;
  out.person_loglik = person_loglik;
  double ll = 0.0;
  for (Eigen::Index n = 0; n < person_loglik.size(); ++n) {
    if (!std::isfinite(person_loglik[n])) {
      throw EvaluationError("non-finite log-likelihood for person " + std::to_string(n),
                            static_cast<std::size_t>(n));
    }
    ll += person_loglik[n];
  }
  out.loglik = ll;
  if (detail == EvalDetail::value) return out;

  const auto free = params.free_indices();
  const auto N = person_loglik.size();
  const auto K = static_cast<Eigen::Index>(free.size());
  out.gradient = Eigen::VectorXd::Zero(K);
  if (detail == EvalDetail::scores) out.scores.resize(N, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto col = static_cast<Eigen::Index>(free[static_cast<std::size_t>(k)]);
    double g = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double s = person_scores(n, col);
      if (!std::isfinite(s)) {
        throw EvaluationError("non-finite score for person " + std::to_string(n),
                              static_cast<std::size_t>(n));
      }
      g += s;
    }
    out.gradient[k] = g;
    if (detail == EvalDetail::scores) out.scores.col(k) = person_scores.col(col);
  }
  return out;
}

ChoiceModel::ChoiceModel(ModelSpec spec, std::shared_ptr<const ChoiceDataset> data)
    : spec_(std::move(spec)), data_(std::move(data)), layout_(spec_) {
  if (!data_) throw Error(ErrorKind::spec, "model requires a dataset");
}

std::vector<std::size_t> ChoiceModel::resolve_attributes(
    const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) {
    try {
      idx.push_back(data_->attribute_index(n));
    } catch (const Error&) {
      throw Error(ErrorKind::spec, "model attribute '" + n + "' not in dataset");
    }
  }
  return idx;
}

LikelihoodEvaluation ChoiceModel::evaluate(const ParameterVector& params,
                                           EvalDetail detail) const {
  if (params.size() != layout_.size()) {
    throw Error(ErrorKind::spec, "parameter vector has " + std::to_string(params.size()) +
                                     " entries, model expects " +
                                     std::to_string(layout_.size()));
  }
  const Eigen::VectorXd values = params.values();
  Eigen::VectorXd person_ll(static_cast<Eigen::Index>(data_->persons()));
  Eigen::MatrixXd scores;
  person_terms(values, person_ll, detail == EvalDetail::value ? nullptr : &scores);
  return total_loglikelihood(person_ll, scores, params, detail);
}

std::unique_ptr<ChoiceModel> make_model(const ModelSpec& spec,
                                        std::shared_ptr<const ChoiceDataset> data,
                                        std::shared_ptr<const DrawMatrix> draws) {
  spec.validate();
  switch (spec.family) {
    case ModelFamily::mnl: return detail::make_mnl_model(spec, std::move(data));
    case ModelFamily::latent_class:
      return detail::make_latent_class_model(spec, std::move(data));
    case ModelFamily::mixed_logit_wtp:
      return detail::make_mixed_logit_model(spec, std::move(data), std::move(draws));
  }
  throw Error(ErrorKind::spec, "unknown model family");
}

LikelihoodEvaluation lc_person_likelihood(std::shared_ptr<const ChoiceDataset> ds,
                                          const ParameterVector& beta, const ModelSpec& spec,
                                          EvalDetail detail) {
  if (spec.family != ModelFamily::latent_class) {
    throw Error(ErrorKind::spec, "lc_person_likelihood needs a latent class spec");
  }
  return make_model(spec, std::move(ds))->evaluate(beta, detail);
}

LikelihoodEvaluation mmnl_simulated_likelihood(std::shared_ptr<const ChoiceDataset> ds,
                                               const ParameterVector& beta,
                                               const ModelSpec& spec,
                                               std::shared_ptr<const DrawMatrix> draws,
                                               EvalDetail detail) {
  if (spec.family != ModelFamily::mixed_logit_wtp) {
    throw Error(ErrorKind::spec, "mmnl_simulated_likelihood needs a mixed logit spec");
  }
  return make_model(spec, std::move(ds), std::move(draws))->evaluate(beta, detail);
}

LogLikelihoodFn make_objective(const ChoiceModel& model) {
  return [&model](const ParameterVector& params, Eigen::VectorXd* grad) {
    auto ev = model.evaluate(params, grad ? EvalDetail::gradient : EvalDetail::value);
    if (grad) *grad = std::move(ev.gradient);
    return ev.loglik;
  };
}

}  // namespace dcpl
