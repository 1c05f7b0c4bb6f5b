#pragma once

// Umbrella header: the full batched variance-reduction toolkit.

#include "vcsg/vec.hpp"
#include "vcsg/rng.hpp"
#include "vcsg/sampler.hpp"
#include "vcsg/oracle.hpp"
#include "vcsg/problems.hpp"
#include "vcsg/estimators.hpp"
#include "vcsg/schedules.hpp"
#include "vcsg/optimizers.hpp"
#include "vcsg/analysis.hpp"
#include "vcsg/trace_io.hpp"
#include "vcsg/config.hpp"
#include "vcsg/bench.hpp"
#include "vcsg/cli.hpp"
