#pragma once

// Umbrella header.

#include "gesmr/analysis.hpp"
#include "gesmr/config.hpp"
#include "gesmr/controllers.hpp"
#include "gesmr/engine.hpp"
#include "gesmr/errors.hpp"
#include "gesmr/harness.hpp"
#include "gesmr/objectives.hpp"
#include "gesmr/oracles.hpp"
#include "gesmr/rng.hpp"
#include "gesmr/stats.hpp"
#include "gesmr/trace_io.hpp"
