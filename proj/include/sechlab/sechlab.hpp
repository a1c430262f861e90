#pragma once

#include "sechlab/cf_equations.hpp"
#include "sechlab/chebyshev.hpp"
#include "sechlab/distributions.hpp"
#include "sechlab/experiments.hpp"
#include "sechlab/rng.hpp"
#include "sechlab/simulate.hpp"
#include "sechlab/stats.hpp"
#include "sechlab/version.hpp"
