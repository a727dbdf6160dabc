#pragma once

// Imitation-from-observation with an automatically scheduled discount:
// transport-based proxy rewards, a progress recognizer driving gamma, an
// off-policy actor-critic, and synthetic progress-dependent tasks.

#include "ilfo/common.hpp"
#include "ilfo/config.hpp"
#include "ilfo/cost.hpp"
#include "ilfo/demo_io.hpp"
#include "ilfo/env.hpp"
#include "ilfo/harness.hpp"
#include "ilfo/mlp.hpp"
#include "ilfo/ot.hpp"
#include "ilfo/progress.hpp"
#include "ilfo/replay.hpp"
#include "ilfo/report.hpp"
#include "ilfo/td3.hpp"
#include "ilfo/types.hpp"
