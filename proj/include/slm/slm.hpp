#pragma once

#include "slm/benchfuncs.hpp"
#include "slm/config.hpp"
#include "slm/engine.hpp"
#include "slm/error.hpp"
#include "slm/grid.hpp"
#include "slm/harness.hpp"
#include "slm/labeling.hpp"
#include "slm/objective.hpp"
#include "slm/parallel.hpp"
#include "slm/registry.hpp"
