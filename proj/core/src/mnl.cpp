#include <cmath>
#include <limits>
#include <vector>

#include "dcpl/errors.hpp"
#include "dcpl/models.hpp"
#include "model_kernels.hpp"

namespace dcpl {
namespace {

class MnlModel final : public ChoiceModel {
 public:
  MnlModel(const ModelSpec& spec, std::shared_ptr<const ChoiceDataset> data)
      : ChoiceModel(spec, std::move(data)), attrs_(resolve_attributes(spec.attributes)) {}

  void person_terms(const Eigen::VectorXd& values, Eigen::VectorXd& person_ll,
                    Eigen::MatrixXd* scores) const override {
    const auto& ds = data();
    const std::size_t A = attrs_.size();
    std::vector<double> util(ds.alternatives());
    if (scores) scores->setZero(static_cast<Eigen::Index>(ds.persons()), static_cast<Eigen::Index>(A));
    std::vector<double> g(A);
    for (std::size_t n = 0; n < ds.persons(); ++n) {
      std::fill(g.begin(), g.end(), 0.0);
      double ll = 0.0;
      const std::size_t first = ds.first_observation(n);
      for (std::size_t t = 0; t < ds.tasks(n); ++t) {
        ll += detail::logit_task(ds, first + t, attrs_, values.data(), scores ? g.data() : nullptr,
                                 util.data(), n, t);
      }
      person_ll[static_cast<Eigen::Index>(n)] = ll;
      if (scores) {
        for (std::size_t a = 0; a < A; ++a) {
          (*scores)(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(a)) = g[a];
        }
      }
    }
  }

 private:
  std::vector<std::size_t> attrs_;
};

}  // namespace

namespace detail {
std::unique_ptr<ChoiceModel> make_mnl_model(const ModelSpec& spec,
                                            std::shared_ptr<const ChoiceDataset> data) {
  return std::make_unique<MnlModel>(spec, std::move(data));
}
}  // namespace detail

Eigen::MatrixXd mnl_probabilities(const ChoiceDataset& ds, const ParameterVector& beta) {
  const std::size_t A = ds.attribute_count();
  if (beta.size() != A) {
    throw Error(ErrorKind::spec, "MNL needs one coefficient per attribute (" +
                                     std::to_string(A) + "), got " +
                                     std::to_string(beta.size()));
  }
  const std::size_t J = ds.alternatives();
  Eigen::MatrixXd p(static_cast<Eigen::Index>(ds.observations()), static_cast<Eigen::Index>(J));
  std::vector<double> v(J);
  for (std::size_t n = 0; n < ds.persons(); ++n) {
    for (std::size_t t = 0; t < ds.tasks(n); ++t) {
      const std::size_t obs = ds.first_observation(n) + t;
      double vmax = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < J; ++j) {
        double u = 0.0;
        for (std::size_t a = 0; a < A; ++a) u += beta[a].value * ds.x(obs, j, a);
        if (!std::isfinite(u)) throw EvaluationError("non-finite utility", n, t);
        v[j] = u;
        vmax = std::max(vmax, u);
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < J; ++j) denom += (v[j] = std::exp(v[j] - vmax));
      for (std::size_t j = 0; j < J; ++j) {
        p(static_cast<Eigen::Index>(obs), static_cast<Eigen::Index>(j)) = v[j] / denom;
      }
    }
  }
  return p;
}

}  // namespace dcpl
