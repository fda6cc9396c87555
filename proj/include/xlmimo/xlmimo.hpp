// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/beamspace.hpp"
#include "xlmimo/channel.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/geometry.hpp"
#include "xlmimo/pilot.hpp"
#include "xlmimo/synthesis.hpp"
#include "xlmimo/training.hpp"
#include "xlmimo/types.hpp"
#include "xlmimo/version.hpp"

#include "xlmimo/solvers/lasso.hpp"
#include "xlmimo/solvers/linear_operator.hpp"
#include "xlmimo/solvers/omp.hpp"
#include "xlmimo/solvers/projection.hpp"

#include "xlmimo/estimation/admm.hpp"
#include "xlmimo/estimation/baselines.hpp"
#include "xlmimo/estimation/decomposed.hpp"
#include "xlmimo/estimation/nmse.hpp"
#include "xlmimo/estimation/position_init.hpp"
#include "xlmimo/estimation/result.hpp"

#include "xlmimo/harness/output.hpp"
#include "xlmimo/harness/runner.hpp"
#include "xlmimo/harness/scenario.hpp"
