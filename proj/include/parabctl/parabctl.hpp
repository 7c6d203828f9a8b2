#pragma once

#include "parabctl/error.hpp"
#include "parabctl/grid.hpp"
#include "parabctl/diffusion.hpp"
#include "parabctl/problem.hpp"
#include "parabctl/controllers.hpp"
#include "parabctl/certificates.hpp"
#include "parabctl/solver.hpp"
#include "parabctl/diagnostics.hpp"
#include "parabctl/io.hpp"
#include "parabctl/scenario.hpp"
#include "parabctl/commands.hpp"
