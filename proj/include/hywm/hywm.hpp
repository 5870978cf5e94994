#pragma once

#include "hywm/ecg.hpp"
#include "hywm/errors.hpp"
#include "hywm/experiments.hpp"
#include "hywm/grid_engine.hpp"
#include "hywm/hybrid_engine.hpp"
#include "hywm/policy_manager.hpp"
#include "hywm/resource_manager.hpp"
#include "hywm/sim_kernel.hpp"
#include "hywm/strategy_registry.hpp"
#include "hywm/workflow_model.hpp"
