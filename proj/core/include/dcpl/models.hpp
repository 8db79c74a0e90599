#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dcpl/data.hpp"
#include "dcpl/draws.hpp"
#include "dcpl/parameters.hpp"

namespace dcpl {

enum class ModelFamily { mnl, latent_class, mixed_logit_wtp };
enum class LognormalSign { positive, negative };

std::string to_string(ModelFamily family);
ModelFamily parse_model_family(const std::string& text);

struct RandomCoefficient {
  std::string name;       // label used in parameter names, e.g. "vtt"
  std::string attribute;  // data attribute the coefficient multiplies
  LognormalSign sign = LognormalSign::positive;
};

// Model structure. For the WTP-space mixed logit, utility is
//   V = b_scale * (x_scale + sum_w b_w * x_w)
// where b_scale is the random coefficient named by `scale_coefficient` and
// every other random coefficient is a willingness-to-pay term.
struct ModelSpec {
  ModelFamily family = ModelFamily::mnl;
  std::vector<std::string> attributes;  // mnl / latent_class
  std::size_t classes = 1;              // latent_class
  std::vector<RandomCoefficient> random;
  std::string scale_coefficient;

  static ModelSpec mnl(std::vector<std::string> attributes);
  static ModelSpec latent_class(std::vector<std::string> attributes, std::size_t classes);
  static ModelSpec mixed_logit_wtp(std::vector<RandomCoefficient> random,
                                   std::string scale_coefficient);

  void validate() const;
  std::size_t random_dimensions() const noexcept { return random.size(); }
  std::size_t scale_index() const;
  bool operator==(const ModelSpec&) const = default;
};

// Positions of each structural parameter in the canonical ordering.
//   mnl:             b_<attr>
//   latent_class:    b_<attr>_<c> (attribute-major, class-minor), then
//                    delta_1..delta_C with delta_C fixed at 0
//   mixed_logit_wtp: per random coefficient d, mu_<d> followed by row d of
//                    the Cholesky factor: c_<e>_<d> for e < d, then c_<d>
class ParameterLayout {
 public:
  explicit ParameterLayout(const ModelSpec& spec);

  std::size_t size() const noexcept { return size_; }
  std::size_t coefficient(std::size_t attr) const { return attr; }
  std::size_t class_coefficient(std::size_t attr, std::size_t cls) const {
    return attr * classes_ + cls;
  }
  std::size_t class_constant(std::size_t cls) const { return attributes_ * classes_ + cls; }
  std::size_t mean(std::size_t d) const { return d + d * (d + 1) / 2; }
  std::size_t cholesky(std::size_t row, std::size_t col) const { return mean(row) + 1 + col; }

  // Names plus the structural mask (delta_C fixed); values are zero.
  ParameterVector template_parameters() const;

 private:
  ModelSpec spec_;
  std::size_t attributes_ = 0;
  std::size_t classes_ = 1;
  std::size_t size_ = 0;
};

struct LikelihoodEvaluation {
  double loglik = 0.0;
  Eigen::VectorXd person_loglik;  // one entry per person
  Eigen::VectorXd gradient;       // free entries only
  Eigen::MatrixXd scores;         // persons x free entries; empty unless requested
};

enum class EvalDetail { value, gradient, scores };

// Sums per-person terms in person order and projects the score rows onto the
// free parameters. Throws EvaluationError naming the first non-finite person.
LikelihoodEvaluation total_loglikelihood(const Eigen::VectorXd& person_loglik,
                                         const Eigen::MatrixXd& person_scores,
                                         const ParameterVector& params, EvalDetail detail);

class ChoiceModel {
 public:
  virtual ~ChoiceModel() = default;

  const ModelSpec& spec() const noexcept { return spec_; }
  const ChoiceDataset& data() const noexcept { return *data_; }
  std::shared_ptr<const ChoiceDataset> shared_data() const noexcept { return data_; }
  const ParameterLayout& layout() const noexcept { return layout_; }
  ParameterVector template_parameters() const { return layout_.template_parameters(); }

  LikelihoodEvaluation evaluate(const ParameterVector& params,
                                EvalDetail detail = EvalDetail::gradient) const;

  // Full-length per-person score rows (persons x layout().size()) are
  // written only when `scores` is non-null.
  virtual void person_terms(const Eigen::VectorXd& values, Eigen::VectorXd& person_ll,
                            Eigen::MatrixXd* scores) const = 0;

 protected:
  ChoiceModel(ModelSpec spec, std::shared_ptr<const ChoiceDataset> data);
  std::vector<std::size_t> resolve_attributes(const std::vector<std::string>& names) const;

 private:
  ModelSpec spec_;
  std::shared_ptr<const ChoiceDataset> data_;
  ParameterLayout layout_;
};

std::unique_ptr<ChoiceModel> make_model(const ModelSpec& spec,
                                        std::shared_ptr<const ChoiceDataset> data,
                                        std::shared_ptr<const DrawMatrix> draws = nullptr);

// Choice probabilities, one row per observation, one column per alternative.
Eigen::MatrixXd mnl_probabilities(const ChoiceDataset& ds, const ParameterVector& beta);

LikelihoodEvaluation lc_person_likelihood(std::shared_ptr<const ChoiceDataset> ds,
                                          const ParameterVector& beta, const ModelSpec& spec,
                                          EvalDetail detail = EvalDetail::scores);

LikelihoodEvaluation mmnl_simulated_likelihood(std::shared_ptr<const ChoiceDataset> ds,
                                               const ParameterVector& beta,
                                               const ModelSpec& spec,
                                               std::shared_ptr<const DrawMatrix> draws,
                                               EvalDetail detail = EvalDetail::scores);

// Log-likelihood with gradient over the free entries; the optimizer's view of
// a model. Writes the gradient only when the pointer is non-null.
using LogLikelihoodFn =
    std::function<double(const ParameterVector& params, Eigen::VectorXd* free_gradient)>;

LogLikelihoodFn make_objective(const ChoiceModel& model);

}  // namespace dcpl
