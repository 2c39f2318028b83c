#pragma once

// Umbrella header for the core numerics. The JSON perturbation-spec reader
// lives in omega_io.hpp and is not pulled in here.

#include "specvar/cylinder.hpp"
#include "specvar/eigenspace.hpp"
#include "specvar/errors.hpp"
#include "specvar/galerkin.hpp"
#include "specvar/linalg.hpp"
#include "specvar/second_variation.hpp"
#include "specvar/torus.hpp"
#include "specvar/trigpoly.hpp"
