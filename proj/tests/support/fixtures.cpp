#include "fixtures.hpp"

#include <cmath>

namespace dcpltest {

using namespace dcpl;

SyntheticDesign travel_design(std::size_t persons, std::size_t tasks) {
  SyntheticDesign d;
  d.attributes = {{"tt", 10, 60}, {"tc", 2, 30}, {"hw", 10, 60}, {"ch", 0, 2}};
  d.alternatives = 2;
  d.persons = persons;
  d.tasks_per_person = tasks;
  return d;
}

ParameterVector with_values(ParameterVector p, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) p.set_value(i, values[i]);
  return p;
}

ParameterVector mnl_truth() {
  return with_values(ParameterLayout(ModelSpec::mnl(kAttributes)).template_parameters(),
                     {-0.06, -0.13, -0.04, -1.15});
}

std::shared_ptr<const ChoiceDataset> synthetic_mnl(std::size_t persons, std::uint64_t seed) {
  return std::make_shared<const ChoiceDataset>(
      synthesize_dataset(mnl_truth(), travel_design(persons), ModelSpec::mnl(kAttributes), seed));
}

ModelSpec lc_spec() { return ModelSpec::latent_class(kAttributes, 2); }

ParameterVector lc_truth() {
  const ParameterLayout lay(lc_spec());
  ParameterVector p = lay.template_parameters();
  const double c1[4] = {-0.019, -0.3, -0.06, -0.072};
  const double c2[4] = {-0.022, -0.557, -0.007, -0.324};
  for (std::size_t a = 0; a < 4; ++a) {
    p.set_value(lay.class_coefficient(a, 0), c1[a]);
    p.set_value(lay.class_coefficient(a, 1), c2[a]);
  }
  p.set_value(lay.class_constant(0), std::log(0.7 / 0.3));
  return p;
}

std::shared_ptr<const ChoiceDataset> planted_lc_dataset() {
  return std::make_shared<const ChoiceDataset>(
      synthesize_dataset(lc_truth(), travel_design(1500), lc_spec(), 7));
}

ParameterVector planted_lc_inferior_start() {
  return with_values(ParameterLayout(lc_spec()).template_parameters(),
                     {-0.0153, -0.6850, -0.3165, -1.6016, -0.0439, -0.9620, -0.1001, 0.2299,
                      4.6564, 0.0});
}

ModelSpec mmnl_spec() {
  return ModelSpec::mixed_logit_wtp({{"vtt", "tt", LognormalSign::positive},
                                     {"tc", "tc", LognormalSign::negative},
                                     {"vhw", "hw", LognormalSign::positive},
                                     {"vch", "ch", LognormalSign::positive}},
                                    "tc");
}

ParameterVector mmnl_point() {
  const ParameterLayout lay(mmnl_spec());
  ParameterVector p = lay.template_parameters();
  const double mu[4] = {-1.0, -2.0, -1.5, 0.5};
  for (std::size_t d = 0; d < 4; ++d) {
    p.set_value(lay.mean(d), mu[d]);
    for (std::size_t e = 0; e <= d; ++e) {
      p.set_value(lay.cholesky(d, e), e == d ? 0.4 + 0.1 * static_cast<double>(d) : 0.15);
    }
  }
  return p;
}

}  // namespace dcpltest
