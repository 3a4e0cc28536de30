#pragma once

#include "abe/config.hpp"
#include "abe/core.hpp"
#include "abe/data.hpp"
#include "abe/error.hpp"
#include "abe/harness.hpp"
#include "abe/metrics.hpp"
#include "abe/mopso.hpp"
#include "abe/parallel.hpp"
#include "abe/report.hpp"
#include "abe/rng.hpp"
#include "abe/stats.hpp"
#include "abe/tuning.hpp"
