#pragma once

// Umbrella include for the market-basket mining library.

#include "mba/dataset.hpp"
#include "mba/errors.hpp"
#include "mba/evaluation.hpp"
#include "mba/format.hpp"
#include "mba/mining.hpp"
#include "mba/multiweb.hpp"
#include "mba/rng.hpp"
#include "mba/rules.hpp"
#include "mba/synth.hpp"
