#ifndef TASOLVE_TASOLVE_HPP_
#define TASOLVE_TASOLVE_HPP_

#include "tasolve/grid.hpp"
#include "tasolve/network.hpp"
#include "tasolve/assignment.hpp"
#include "tasolve/models.hpp"
#include "tasolve/cost.hpp"
#include "tasolve/solvers.hpp"
#include "tasolve/metrics.hpp"
#include "tasolve/scenario.hpp"
#include "tasolve/io.hpp"
#include "tasolve/run.hpp"
#include "tasolve/demo_network.hpp"

#endif  // TASOLVE_TASOLVE_HPP_
