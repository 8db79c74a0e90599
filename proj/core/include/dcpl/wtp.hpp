#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dcpl/models.hpp"
#include "dcpl/parameters.hpp"

namespace dcpl {

// One monetary valuation. For MNL and LC models it is
//   multiplier * b_<attribute> / b_<cost>
// (per class for LC). For the WTP-space mixed logit, `attribute` names the
// random coefficient holding the valuation and `cost` is unused.
struct WtpDefinition {
  std::string name;       // e.g. "VTT"
  std::string attribute;  // e.g. "tt", or "vtt" for mixed logit
  std::string cost;       // e.g. "tc"
  double multiplier = 1.0;
  std::string unit;       // e.g. "CHF/hr"
};

struct WtpEntry {
  std::string quantity;   // e.g. "VTT", "VTT[class 1]", "VTT mean", "rho(vtt,tc)"
  double estimate = 0.0;
  double se = 0.0;        // NaN when no covariance was supplied
  double t_ratio = 0.0;
  std::string unit;
};

struct WtpReport {
  std::vector<WtpEntry> entries;
  std::string note;

  const WtpEntry& at(const std::string& quantity) const;
};

// `covariance` is over the free parameters of `estimates` (may be empty).
// Standard errors come from the Delta method.
WtpReport wtp_report(const ModelSpec& spec, const ParameterVector& estimates,
                     const Eigen::MatrixXd& covariance,
                     const std::vector<WtpDefinition>& definitions);

// Lognormal moment helpers for the mixed logit; `values` is the full
// parameter vector in layout order.
struct LognormalMoments {
  Eigen::VectorXd mean;         // signed means of the coefficients
  Eigen::VectorXd sd;
  Eigen::MatrixXd correlation;  // of the signed coefficients
};
LognormalMoments lognormal_moments(const ModelSpec& spec, const Eigen::VectorXd& values);

}  // namespace dcpl
