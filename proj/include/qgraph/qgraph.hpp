#ifndef QGRAPH_QGRAPH_HPP
#define QGRAPH_QGRAPH_HPP

// Numerical core. The scenario and CLI layers (scenario.hpp, cli.hpp) also need json.hpp.
#include "counting.hpp"
#include "evans.hpp"
#include "graph.hpp"
#include "maps.hpp"
#include "propagator.hpp"
#include "resolvent.hpp"

#endif  // QGRAPH_QGRAPH_HPP
