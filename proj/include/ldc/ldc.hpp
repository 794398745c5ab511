#pragma once

// Umbrella header for the numerical core. The CLI lives in ldc/cli.hpp.

#include "ldc/density.hpp"
#include "ldc/divergence.hpp"
#include "ldc/error.hpp"
#include "ldc/experiments.hpp"
#include "ldc/posterior.hpp"
#include "ldc/projection.hpp"
#include "ldc/quadrature.hpp"
#include "ldc/report_io.hpp"
#include "ldc/rng.hpp"
