#pragma once

// Umbrella header. png_export.hpp is excluded since it needs libpng.

#include "lidarwx/error.hpp"
#include "lidarwx/evaluate.hpp"
#include "lidarwx/grid.hpp"
#include "lidarwx/io.hpp"
#include "lidarwx/kdtree.hpp"
#include "lidarwx/losses.hpp"
#include "lidarwx/metrics.hpp"
#include "lidarwx/modalities.hpp"
#include "lidarwx/physics.hpp"
#include "lidarwx/point_cloud.hpp"
#include "lidarwx/projection.hpp"
#include "lidarwx/rng.hpp"
#include "lidarwx/stack_io.hpp"
#include "lidarwx/synthetic.hpp"
#include "lidarwx/version.hpp"
#include "lidarwx/weather_augment.hpp"
