#pragma once

// Umbrella header.

#include "curvlab/catalog.hpp"
#include "curvlab/curvature.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/expr.hpp"
#include "curvlab/geometry.hpp"
#include "curvlab/jet.hpp"
#include "curvlab/metric_spec.hpp"
#include "curvlab/report.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/tensor.hpp"
#include "curvlab/theorems.hpp"
#include "curvlab/verify.hpp"
