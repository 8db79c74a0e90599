#include "dcpl/distributions.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "dcpl/errors.hpp"

namespace dcpl {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double log_normal_sf(double z) {
  if (z < 8.0) return std::log(normal_sf(z));
  // Mills ratio R(z) = (1 - Phi(z)) / phi(z) by its continued fraction
  //   R = 1/(z + 1/(z + 2/(z + 3/(z + ...)))), evaluated bottom-up.
  double tail = z;
  for (int k = 60; k >= 1; --k) tail = z + k / tail;
  const double log_phi = -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
  return log_phi - std::log(tail);
}

double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw Error(ErrorKind::domain, "chi-square degrees of freedom must be > 0");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chi2_isf(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::domain, "chi2_isf probability outside (0,1)");
  if (!(df > 0.0)) throw Error(ErrorKind::domain, "chi-square degrees of freedom must be > 0");
  return 2.0 * boost::math::gamma_q_inv(0.5 * df, p);
}

}  // namespace dcpl
