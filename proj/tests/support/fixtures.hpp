#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <dcpl/dcpl.hpp>

namespace dcpltest {

inline const std::vector<std::string> kAttributes{"tt", "tc", "hw", "ch"};

// Travel time and headway in minutes, cost in CHF, interchanges as counts.
dcpl::SyntheticDesign travel_design(std::size_t persons, std::size_t tasks = 9);

// (tt, tc, hw, ch) = (-0.06, -0.13, -0.04, -1.15)
dcpl::ParameterVector mnl_truth();
std::shared_ptr<const dcpl::ChoiceDataset> synthetic_mnl(std::size_t persons,
                                                         std::uint64_t seed);

// Two well-separated classes with shares 0.7 / 0.3.
dcpl::ModelSpec lc_spec();
dcpl::ParameterVector lc_truth();
std::shared_ptr<const dcpl::ChoiceDataset> planted_lc_dataset();  // N = 1500, seed 7
// Starting point that converges to an inferior local optimum of the planted
// LC likelihood (LL about -4005.60 against a global -3960.18).
dcpl::ParameterVector planted_lc_inferior_start();

// WTP-space mixed logit with lognormal tc (negative, the scale) and
// valuations vtt, vhw, vch.
dcpl::ModelSpec mmnl_spec();
dcpl::ParameterVector mmnl_point();  // a moderate, non-degenerate parameter point

dcpl::ParameterVector with_values(dcpl::ParameterVector p, const std::vector<double>& values);

}  // namespace dcpltest
