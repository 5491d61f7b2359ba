#pragma once

#include "arcas/diagnostics.hpp"
#include "arcas/engine.hpp"
#include "arcas/errors.hpp"
#include "arcas/estimators.hpp"
#include "arcas/experiment.hpp"
#include "arcas/matrix.hpp"
#include "arcas/mm_io.hpp"
#include "arcas/oracle.hpp"
#include "arcas/rng.hpp"
#include "arcas/strategies.hpp"
#include "arcas/streaming.hpp"
#include "arcas/subspace.hpp"
#include "arcas/system.hpp"
#include "arcas/tolerances.hpp"
#include "arcas/trace_io.hpp"
#include "arcas/vec.hpp"
