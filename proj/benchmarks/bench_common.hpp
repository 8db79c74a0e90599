#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <dcpl/dcpl.hpp>

namespace bench {

inline const std::vector<std::string> kAttributes{"tt", "tc", "hw", "ch"};

inline dcpl::SyntheticDesign design(std::size_t persons) {
  dcpl::SyntheticDesign d;
  d.attributes = {{"tt", 10, 60}, {"tc", 2, 30}, {"hw", 10, 60}, {"ch", 0, 2}};
  d.persons = persons;
  return d;
}

inline dcpl::ParameterVector filled(const dcpl::ModelSpec& spec, const std::vector<double>& v) {
  dcpl::ParameterVector p = dcpl::ParameterLayout(spec).template_parameters();
  for (std::size_t i = 0; i < v.size(); ++i) p.set_value(i, v[i]);
  return p;
}

inline dcpl::ModelSpec mnl_spec() { return dcpl::ModelSpec::mnl(kAttributes); }
inline dcpl::ParameterVector mnl_point() { return filled(mnl_spec(), {-0.06, -0.13, -0.04, -1.15}); }

inline dcpl::ModelSpec lc_spec() { return dcpl::ModelSpec::latent_class(kAttributes, 2); }
inline dcpl::ParameterVector lc_point() {
  // attribute-major, class-minor, then delta_1, delta_2
  return filled(lc_spec(), {-0.019, -0.022, -0.3, -0.557, -0.06, -0.007, -0.072, -0.324,
                            std::log(0.7 / 0.3), 0.0});
}

inline dcpl::ModelSpec mmnl_spec() {
  using dcpl::LognormalSign;
  return dcpl::ModelSpec::mixed_logit_wtp({{"vtt", "tt", LognormalSign::positive},
                                           {"tc", "tc", LognormalSign::negative},
                                           {"vhw", "hw", LognormalSign::positive},
                                           {"vch", "ch", LognormalSign::positive}},
                                          "tc");
}
inline dcpl::ParameterVector mmnl_point() {
  const dcpl::ModelSpec spec = mmnl_spec();
  const dcpl::ParameterLayout lay(spec);
  dcpl::ParameterVector p = lay.template_parameters();
  const double mu[4] = {-1.0, -2.0, -1.5, 0.5};
  for (std::size_t d = 0; d < 4; ++d) {
    p.set_value(lay.mean(d), mu[d]);
    for (std::size_t e = 0; e <= d; ++e) p.set_value(lay.cholesky(d, e), e == d ? 0.5 : 0.1);
  }
  return p;
}

inline std::shared_ptr<const dcpl::ChoiceDataset> dataset(const dcpl::ModelSpec& spec,
                                                          const dcpl::ParameterVector& truth,
                                                          std::size_t persons) {
  return std::make_shared<const dcpl::ChoiceDataset>(
      dcpl::synthesize_dataset(truth, design(persons), spec, 11));
}

}  // namespace bench
