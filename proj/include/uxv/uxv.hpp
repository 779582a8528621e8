#pragma once

#include "uxv/ctl.hpp"
#include "uxv/diagnostic.hpp"
#include "uxv/error.hpp"
#include "uxv/geometry.hpp"
#include "uxv/grafcet.hpp"
#include "uxv/pipeline.hpp"
#include "uxv/plan.hpp"
#include "uxv/planner.hpp"
#include "uxv/properties.hpp"
#include "uxv/rules.hpp"
#include "uxv/semantics.hpp"
#include "uxv/simulator.hpp"
