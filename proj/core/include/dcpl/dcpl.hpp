#pragma once

#include "dcpl/data.hpp"
#include "dcpl/distributions.hpp"
#include "dcpl/draws.hpp"
#include "dcpl/errors.hpp"
#include "dcpl/inference.hpp"
#include "dcpl/models.hpp"
#include "dcpl/optimize.hpp"
#include "dcpl/parallel.hpp"
#include "dcpl/parameters.hpp"
#include "dcpl/profile.hpp"
#include "dcpl/synthesize.hpp"
#include "dcpl/wtp.hpp"
