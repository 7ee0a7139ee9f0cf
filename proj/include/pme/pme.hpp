#pragma once

#include "pme/assembly.hpp"
#include "pme/discretization.hpp"
#include "pme/error.hpp"
#include "pme/logdensity.hpp"
#include "pme/mesh.hpp"
#include "pme/mesh_io.hpp"
#include "pme/mixed.hpp"
#include "pme/problems.hpp"
#include "pme/quadrature.hpp"
#include "pme/harness/config.hpp"
#include "pme/harness/convergence.hpp"
#include "pme/harness/l2_error.hpp"
#include "pme/harness/output.hpp"
#include "pme/harness/simulation.hpp"
