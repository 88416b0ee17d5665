#pragma once

#include "cotrack/ap_manager.hpp"
#include "cotrack/baseline.hpp"
#include "cotrack/config.hpp"
#include "cotrack/geometry.hpp"
#include "cotrack/measurement.hpp"
#include "cotrack/metrics.hpp"
#include "cotrack/phd.hpp"
#include "cotrack/rng.hpp"
#include "cotrack/runner.hpp"
#include "cotrack/scenario.hpp"
#include "cotrack/trace.hpp"
