#pragma once

#include "scopeflow/error.hpp"
#include "scopeflow/raster.hpp"
#include "scopeflow/rational.hpp"
#include "scopeflow/rng.hpp"
#include "scopeflow/flowio.hpp"
#include "scopeflow/png_io.hpp"
#include "scopeflow/dataset.hpp"
#include "scopeflow/sampling.hpp"
#include "scopeflow/scoping.hpp"
#include "scopeflow/flowops.hpp"
#include "scopeflow/augmentation.hpp"
#include "scopeflow/schedule.hpp"
