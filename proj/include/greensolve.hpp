#pragma once

#include "greensolve/errors.hpp"
#include "greensolve/linalg.hpp"
#include "greensolve/sets.hpp"
#include "greensolve/quadrature.hpp"
#include "greensolve/parallel.hpp"
#include "greensolve/generator.hpp"
#include "greensolve/cutoff.hpp"
#include "greensolve/green.hpp"
#include "greensolve/harmonic.hpp"
#include "greensolve/solver.hpp"
#include "greensolve/io.hpp"
#include "greensolve/scenario.hpp"
