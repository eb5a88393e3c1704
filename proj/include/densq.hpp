#pragma once

#include "densq/betas.hpp"
#include "densq/config.hpp"
#include "densq/error.hpp"
#include "densq/experiments.hpp"
#include "densq/generators.hpp"
#include "densq/io.hpp"
#include "densq/measure.hpp"
#include "densq/measure_spec.hpp"
#include "densq/multiscale.hpp"
#include "densq/riesz.hpp"
#include "densq/scale_grid.hpp"
#include "densq/smoothing.hpp"
#include "densq/sweep.hpp"
#include "densq/thin_boundary.hpp"
