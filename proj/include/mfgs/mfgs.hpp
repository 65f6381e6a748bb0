#pragma once

// Social-optimum solvers for finite-state mean field games.

#include "mfgs/config.hpp"
#include "mfgs/core.hpp"
#include "mfgs/cost_models.hpp"
#include "mfgs/errors.hpp"
#include "mfgs/horizon.hpp"
#include "mfgs/rng.hpp"
#include "mfgs/runner.hpp"
#include "mfgs/simplex.hpp"
#include "mfgs/stage_solver.hpp"
#include "mfgs/stationary.hpp"
#include "mfgs/types.hpp"
#include "mfgs/verification.hpp"
