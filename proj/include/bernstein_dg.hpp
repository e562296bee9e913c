#pragma once

// Umbrella header for the bernstein_dg library.

#include "bernstein_dg/bernstein.hpp"
#include "bernstein_dg/dg_solver.hpp"
#include "bernstein_dg/errors.hpp"
#include "bernstein_dg/experiment.hpp"
#include "bernstein_dg/pa_sensor.hpp"
#include "bernstein_dg/problem_spec.hpp"
#include "bernstein_dg/problems.hpp"
#include "bernstein_dg/quadrature.hpp"
