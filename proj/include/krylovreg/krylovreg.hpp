#pragma once

// Umbrella header for the krylovreg library.

#include "arnoldi.hpp"
#include "dft.hpp"
#include "experiment.hpp"
#include "linalg.hpp"
#include "matrix_market.hpp"
#include "nearness.hpp"
#include "operator.hpp"
#include "preconditioners.hpp"
#include "problems.hpp"
#include "regularization.hpp"
#include "rng.hpp"
#include "solvers.hpp"
#include "svg.hpp"
#include "types.hpp"
