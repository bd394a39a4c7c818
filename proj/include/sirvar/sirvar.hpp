#pragma once

// Umbrella header.

#include "abm.hpp"
#include "core.hpp"
#include "data.hpp"
#include "experiment.hpp"
#include "monte_carlo.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sd_model.hpp"
#include "stats.hpp"
#include "version.hpp"
