#pragma once

#include "lpit/linalg.hpp"
#include "lpit/penalty.hpp"
#include "lpit/thresholds.hpp"
#include "lpit/rng.hpp"
#include "lpit/solvers.hpp"
#include "lpit/problem.hpp"
#include "lpit/bench.hpp"
