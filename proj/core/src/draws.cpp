#include "dcpl/draws.hpp"

#include <cmath>
#include <numbers>

#include "dcpl/errors.hpp"
#include "sobol_directions.hpp"

namespace dcpl {
namespace {

constexpr unsigned kBits = 32;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Acklam's rational approximation for the lower half, u in (0, 0.5].
double lower_quantile_guess(double u) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double u_low = 0.02425;
  if (u < u_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double lower_quantile(double u) {
  double x = lower_quantile_guess(u);
  // One Halley step against erfc; the residual is computed in the accurate tail.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
  const double t = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= t / (1.0 + 0.5 * x * t);
  return x;
}

}  // namespace

// ---------------------------------------------------------------- Sobol

SobolSequence::SobolSequence(std::size_t dimension, std::size_t skip,
                             std::optional<std::uint64_t> shift_seed)
    : dimension_(dimension),
      directions_(dimension * kBits),
      state_(dimension, 0),
      shift_(dimension, 0) {
  if (dimension == 0 || dimension > kMaxSobolDimension) {
    throw Error(ErrorKind::config, "Sobol dimension " + std::to_string(dimension) +
                                       " outside supported range 1.." +
                                       std::to_string(kMaxSobolDimension));
  }
  for (unsigned i = 0; i < kBits; ++i) directions_[i] = 1U << (kBits - 1 - i);
  for (std::size_t d = 1; d < dimension; ++d) {
    const auto& poly = detail::kSobolTable[d - 1];
    const unsigned s = poly.degree;
    std::uint32_t* v = directions_.data() + d * kBits;
    for (unsigned i = 0; i < s; ++i) v[i] = poly.initial[i] << (kBits - 1 - i);
    for (unsigned i = s; i < kBits; ++i) {
      v[i] = v[i - s] ^ (v[i - s] >> s);
      for (unsigned k = 1; k < s; ++k) {
        if ((poly.coefficients >> (s - 1 - k)) & 1U) v[i] ^= v[i - k];
      }
    }
  }
  if (shift_seed) {
    std::uint64_t st = *shift_seed;
    for (auto& s : shift_) s = static_cast<std::uint32_t>(splitmix64(st) >> 32);
  }
  for (std::size_t i = 0; i < skip; ++i) advance();
}

void SobolSequence::advance() {
  // Gray-code update: flip the direction of the lowest zero bit of the index.
  unsigned c = 0;
  for (std::uint64_t i = index_; i & 1U; i >>= 1) ++c;
  if (c >= kBits) throw Error(ErrorKind::config, "Sobol sequence exhausted");
  for (std::size_t d = 0; d < dimension_; ++d) state_[d] ^= directions_[d * kBits + c];
  ++index_;
}

void SobolSequence::next(std::span<double> out) {
  constexpr double scale = 1.0 / 4294967296.0;
  for (std::size_t d = 0; d < dimension_; ++d) {
    out[d] = static_cast<double>(state_[d] ^ shift_[d]) * scale;
  }
  advance();
}

Eigen::MatrixXd sobol_sequence(std::size_t count, std::size_t dim, std::size_t skip) {
  if (count == 0) throw Error(ErrorKind::config, "Sobol point count must be positive");
  SobolSequence seq(dim, skip);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts(
      static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < count; ++i) {
    seq.next({pts.row(static_cast<Eigen::Index>(i)).data(), dim});
  }
  return pts;
}

// ---------------------------------------------------------------- normal quantile

double inv_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(ErrorKind::domain, "inv_normal_cdf argument outside (0,1)");
  }
  if (u == 0.5) return 0.0;
  // 1 - u is exact for u >= 0.5, which also makes the map exactly odd.
  return u < 0.5 ? lower_quantile(u) : -lower_quantile(1.0 - u);
}

// ---------------------------------------------------------------- draws

void SobolConfig::validate() const {
  if (draws_per_person == 0) throw Error(ErrorKind::config, "draws per person must be >= 1");
  if (dimensions == 0 || dimensions > kMaxSobolDimension) {
    throw Error(ErrorKind::config, "draw dimensions outside 1.." +
                                       std::to_string(kMaxSobolDimension));
  }
  if (skip == 0 && !shift_seed) {
    throw Error(ErrorKind::config, "skip must be >= 1 (the first Sobol point is the origin)");
  }
  if (antithetic) {
    if (dimensions >= 16) throw Error(ErrorKind::config, "antithetic draws support < 16 dimensions");
    const std::size_t block = std::size_t{1} << dimensions;
    if (draws_per_person % block != 0) {
      throw Error(ErrorKind::config, "antithetic draws need draws per person divisible by " +
                                         std::to_string(block));
    }
  }
}

DrawMatrix::DrawMatrix(std::size_t persons, std::size_t draws, std::size_t dimensions,
                       std::vector<double> values, DrawProvenance provenance)
    : persons_(persons),
      draws_(draws),
      dimensions_(dimensions),
      values_(std::move(values)),
      provenance_(std::move(provenance)) {
  if (values_.size() != persons_ * draws_ * dimensions_) {
    throw Error(ErrorKind::spec, "draw tensor size mismatch");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::spec, "non-finite draw");
  }
}

DrawMatrix build_person_draws(const SobolConfig& cfg, std::size_t persons) {
  cfg.validate();
  const std::size_t K = cfg.dimensions;
  const std::size_t R = cfg.draws_per_person;
  const std::size_t block = cfg.antithetic ? (std::size_t{1} << K) : 1;
  const std::size_t base = R / block;

  SobolSequence seq(K, cfg.skip, cfg.shift_seed);
  std::vector<double> values(persons * R * K);
  std::vector<double> u(K);
  std::vector<double> z(K);
  double* out = values.data();
  for (std::size_t n = 0; n < persons; ++n) {
    for (std::size_t b = 0; b < base; ++b) {
      seq.next(u);
      for (std::size_t d = 0; d < K; ++d) z[d] = inv_normal_cdf(u[d]);
      for (std::size_t mask = 0; mask < block; ++mask) {
        for (std::size_t d = 0; d < K; ++d) *out++ = ((mask >> d) & 1U) ? -z[d] : z[d];
      }
    }
  }
  DrawProvenance prov;
  prov.skip = cfg.skip;
  prov.antithetic = cfg.antithetic;
  prov.shift_seed = cfg.shift_seed;
  prov.points_per_person = base;
  return DrawMatrix(persons, R, K, std::move(values), std::move(prov));
}

Eigen::VectorXd cholesky_transform(const Eigen::VectorXd& mean,
                                   std::span<const double> packed_lower,
                                   std::span<const double> z, std::span<const double> signs) {
  const auto K = static_cast<std::size_t>(mean.size());
  if (packed_lower.size() != packed_lower_size(K) || z.size() != K || signs.size() != K) {
    throw Error(ErrorKind::spec, "cholesky_transform dimension mismatch");
  }
  Eigen::VectorXd beta(mean.size());
  for (std::size_t d = 0; d < K; ++d) {
    double u = mean[static_cast<Eigen::Index>(d)];
    for (std::size_t e = 0; e <= d; ++e) u += packed_lower[packed_lower_index(d, e)] * z[e];
    beta[static_cast<Eigen::Index>(d)] = signs[d] * std::exp(u);
  }
  return beta;
}

}  // namespace dcpl
