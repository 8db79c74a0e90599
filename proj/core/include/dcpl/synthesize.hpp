#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcpl/data.hpp"
#include "dcpl/models.hpp"
#include "dcpl/parameters.hpp"

namespace dcpl {

struct AttributeRange {
  std::string name;
  double low = 0.0;
  double high = 1.0;
};

struct SyntheticDesign {
  std::vector<AttributeRange> attributes;
  std::size_t alternatives = 2;
  std::size_t persons = 100;
  std::size_t tasks_per_person = 9;
};

// Attributes are drawn uniformly from their ranges and choices from the
// model's exact probabilities at `true_params`. Latent classes are drawn once
// per person; mixed logit coefficients are drawn once per person from the
// exact lognormal distribution. Identical seeds give identical datasets.
ChoiceDataset synthesize_dataset(const ParameterVector& true_params,
                                 const SyntheticDesign& design, const ModelSpec& model,
                                 std::uint64_t seed);

}  // namespace dcpl
