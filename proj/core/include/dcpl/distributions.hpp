#pragma once

namespace dcpl {

double normal_cdf(double z);
// Upper tail 1 - Phi(z), accurate far into the tail.
double normal_sf(double z);
// log(1 - Phi(z)); finite for any finite z, including z well beyond 38.
double log_normal_sf(double z);
// Survival function of the chi-square distribution with `df` degrees of freedom.
double chi2_sf(double x, double df);
// Upper quantile: x with chi2_sf(x, df) = p.
double chi2_isf(double p, double df);

}  // namespace dcpl
