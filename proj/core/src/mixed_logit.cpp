#include <cmath>
#include <limits>
#include <vector>

#include "dcpl/errors.hpp"
#include "dcpl/models.hpp"
#include "model_kernels.hpp"

namespace dcpl {
namespace {

// WTP-space mixed logit with correlated lognormal coefficients and a
// simulated panel likelihood
//   l_n = log( R^-1 sum_r prod_t P(y_nt | beta_n^(r)) ),
//   beta_d^(r) = sign_d * exp(mu_d + (L z_r)_d).
// Per-draw products are held in log space and combined with a compensated
// log-sum-exp, so reordering the draw set changes l_n only at rounding level.
class MixedLogitModel final : public ChoiceModel {
 public:
  MixedLogitModel(const ModelSpec& spec, std::shared_ptr<const ChoiceDataset> data,
                  std::shared_ptr<const DrawMatrix> draws)
      : ChoiceModel(spec, std::move(data)), draws_(std::move(draws)) {
    if (!draws_) throw Error(ErrorKind::spec, "mixed logit requires a draw matrix");
    const std::size_t K = spec.random.size();
    if (draws_->persons() != this->data().persons() || draws_->dimensions() != K) {
      throw Error(ErrorKind::spec,
                  "draw matrix is " + std::to_string(draws_->persons()) + " persons x " +
                      std::to_string(draws_->dimensions()) + " dimensions, model needs " +
                      std::to_string(this->data().persons()) + " x " + std::to_string(K));
    }
    std::vector<std::string> names;
    for (const auto& r : spec.random) {
      names.push_back(r.attribute);
      sign_.push_back(r.sign == LognormalSign::negative ? -1.0 : 1.0);
    }
    attrs_ = resolve_attributes(names);
    scale_ = spec.scale_index();
  }

  void person_terms(const Eigen::VectorXd& values, Eigen::VectorXd& person_ll,
                    Eigen::MatrixXd* scores) const override {
    const auto& ds = data();
    const auto& lay = layout();
    const std::size_t K = attrs_.size();
    const std::size_t J = ds.alternatives();
    const std::size_t R = draws_->draws();
    const double log_r = std::log(static_cast<double>(R));

    std::vector<double> mu(K);
    std::vector<double> L(packed_lower_size(K));
    for (std::size_t d = 0; d < K; ++d) {
      mu[d] = values[static_cast<Eigen::Index>(lay.mean(d))];
      for (std::size_t e = 0; e <= d; ++e) {
        L[packed_lower_index(d, e)] = values[static_cast<Eigen::Index>(lay.cholesky(d, e))];
      }
    }

    if (scores) {
      scores->setZero(static_cast<Eigen::Index>(ds.persons()),
                      static_cast<Eigen::Index>(lay.size()));
    }
    std::vector<double> beta(K);
    std::vector<double> s(R);
    std::vector<double> G(scores ? R * K : 0);
    std::vector<double> v(J);
    std::vector<double> m(J);
    std::vector<double> dsdb(K);

    for (std::size_t n = 0; n < ds.persons(); ++n) {
      const std::size_t first = ds.first_observation(n);
      for (std::size_t r = 0; r < R; ++r) {
        const auto z = draws_->draw(n, r);
        for (std::size_t d = 0; d < K; ++d) {
          double u = mu[d];
          for (std::size_t e = 0; e <= d; ++e) u += L[packed_lower_index(d, e)] * z[e];
          beta[d] = sign_[d] * std::exp(u);
        }
        std::fill(dsdb.begin(), dsdb.end(), 0.0);
        double sr = 0.0;
        for (std::size_t t = 0; t < ds.tasks(n); ++t) {
          const std::size_t obs = first + t;
          double vmax = -std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < J; ++j) {
            double inner = ds.x(obs, j, attrs_[scale_]);
            for (std::size_t w = 0; w < K; ++w) {
              if (w != scale_) inner += beta[w] * ds.x(obs, j, attrs_[w]);
            }
            m[j] = inner;
            v[j] = beta[scale_] * inner;
            if (!std::isfinite(v[j])) throw EvaluationError("non-finite utility", n, t);
            vmax = std::max(vmax, v[j]);
          }
          const auto y = static_cast<std::size_t>(ds.choice(obs));
          const double vy = v[y] - vmax;
          double denom = 0.0;
          for (std::size_t j = 0; j < J; ++j) denom += (v[j] = std::exp(v[j] - vmax));
          sr += vy - std::log(denom);
          if (!scores) continue;
          // v now holds unnormalized probabilities.
          double mbar = 0.0;
          for (std::size_t j = 0; j < J; ++j) mbar += v[j] * m[j];
          dsdb[scale_] += m[y] - mbar / denom;
          for (std::size_t w = 0; w < K; ++w) {
            if (w == scale_) continue;
            double xbar = 0.0;
            for (std::size_t j = 0; j < J; ++j) xbar += v[j] * ds.x(obs, j, attrs_[w]);
            dsdb[w] += beta[scale_] * (ds.x(obs, y, attrs_[w]) - xbar / denom);
          }
        }
        s[r] = sr;
        if (scores) {
          // d beta_d / d u_d = beta_d.
          for (std::size_t d = 0; d < K; ++d) G[r * K + d] = dsdb[d] * beta[d];
        }
      }

      double smax = -std::numeric_limits<double>::infinity();
      for (double x : s) smax = std::max(smax, x);
      if (!std::isfinite(smax)) {
        throw EvaluationError("simulated likelihood underflow for person " + std::to_string(n),
                              n);
      }
      detail::CompensatedSum total;
      for (std::size_t r = 0; r < R; ++r) {
        s[r] = std::exp(s[r] - smax);
        total.add(s[r]);
      }
      const double S = total.value();
      person_ll[static_cast<Eigen::Index>(n)] = smax + std::log(S) - log_r;
      if (!scores) continue;

      const auto row = static_cast<Eigen::Index>(n);
      for (std::size_t d = 0; d < K; ++d) {
        detail::CompensatedSum gm;
        std::vector<detail::CompensatedSum> gl(d + 1);
        for (std::size_t r = 0; r < R; ++r) {
          const double wg = s[r] * G[r * K + d];
          gm.add(wg);
          const auto z = draws_->draw(n, r);
          for (std::size_t e = 0; e <= d; ++e) gl[e].add(wg * z[e]);
        }
        (*scores)(row, static_cast<Eigen::Index>(lay.mean(d))) = gm.value() / S;
        for (std::size_t e = 0; e <= d; ++e) {
          (*scores)(row, static_cast<Eigen::Index>(lay.cholesky(d, e))) = gl[e].value() / S;
        }
      }
    }
  }

 private:
  std::shared_ptr<const DrawMatrix> draws_;
  std::vector<std::size_t> attrs_;
  std::vector<double> sign_;
  std::size_t scale_ = 0;
};

}  // namespace

namespace detail {
std::unique_ptr<ChoiceModel> make_mixed_logit_model(const ModelSpec& spec,
                                                    std::shared_ptr<const ChoiceDataset> data,
                                                    std::shared_ptr<const DrawMatrix> draws) {
  return std::make_unique<MixedLogitModel>(spec, std::move(data), std::move(draws));
}
}  // namespace detail

}  // namespace dcpl
