#include <cmath>
#include <vector>

#include "dcpl/models.hpp"
#include "model_kernels.hpp"

namespace dcpl {
namespace {

// Panel latent class logit with constant-only class allocation:
//   l_n = log sum_c pi_c prod_t P(y_nt | beta_c),  pi_c = softmax(delta)_c.
// Scores use the posterior class weights h_nc.
class LatentClassModel final : public ChoiceModel {
 public:
  LatentClassModel(const ModelSpec& spec, std::shared_ptr<const ChoiceDataset> data)
      : ChoiceModel(spec, std::move(data)), attrs_(resolve_attributes(spec.attributes)) {}

  void person_terms(const Eigen::VectorXd& values, Eigen::VectorXd& person_ll,
                    Eigen::MatrixXd* scores) const override {
    const auto& ds = data();
    const auto& lay = layout();
    const std::size_t A = attrs_.size();
    const std::size_t C = spec().classes;

    // beta[c*A + a] for contiguous per-class access.
    std::vector<double> beta(C * A);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t a = 0; a < A; ++a) {
        beta[c * A + a] = values[static_cast<Eigen::Index>(lay.class_coefficient(a, c))];
      }
    }
    std::vector<double> delta(C);
    for (std::size_t c = 0; c < C; ++c) {
      delta[c] = values[static_cast<Eigen::Index>(lay.class_constant(c))];
    }
    const double lse_delta = detail::log_sum_exp(delta);
    std::vector<double> log_pi(C);
    std::vector<double> pi(C);
    for (std::size_t c = 0; c < C; ++c) {
      log_pi[c] = delta[c] - lse_delta;
      pi[c] = std::exp(log_pi[c]);
    }

    if (scores) scores->setZero(static_cast<Eigen::Index>(ds.persons()), static_cast<Eigen::Index>(lay.size()));
    std::vector<double> util(ds.alternatives());
    std::vector<double> g(C * A);
    std::vector<double> joint(C);
    for (std::size_t n = 0; n < ds.persons(); ++n) {
      std::fill(g.begin(), g.end(), 0.0);
      const std::size_t first = ds.first_observation(n);
      for (std::size_t c = 0; c < C; ++c) {
        double lp = 0.0;
        for (std::size_t t = 0; t < ds.tasks(n); ++t) {
          lp += detail::logit_task(ds, first + t, attrs_, beta.data() + c * A,
                                   scores ? g.data() + c * A : nullptr, util.data(), n, t);
        }
        joint[c] = log_pi[c] + lp;
      }
      const double ll = detail::log_sum_exp(joint);
      person_ll[static_cast<Eigen::Index>(n)] = ll;
      if (!scores) continue;
      const auto row = static_cast<Eigen::Index>(n);
      for (std::size_t c = 0; c < C; ++c) {
        const double h = std::exp(joint[c] - ll);
        for (std::size_t a = 0; a < A; ++a) {
          (*scores)(row, static_cast<Eigen::Index>(lay.class_coefficient(a, c))) = h * g[c * A + a];
        }
        (*scores)(row, static_cast<Eigen::Index>(lay.class_constant(c))) = h - pi[c];
      }
    }
  }

 private:
  std::vector<std::size_t> attrs_;
};

}  // namespace

namespace detail {
std::unique_ptr<ChoiceModel> make_latent_class_model(const ModelSpec& spec,
                                                     std::shared_ptr<const ChoiceDataset> data) {
  return std::make_unique<LatentClassModel>(spec, std::move(data));
}
}  // namespace detail

}  // namespace dcpl
