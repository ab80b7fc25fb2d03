#ifndef Q2AMG_Q2AMG_HPP
#define Q2AMG_Q2AMG_HPP

#include "q2amg/sparse.hpp"
#include "q2amg/dense.hpp"
#include "q2amg/graph.hpp"
#include "q2amg/banded_lu.hpp"
#include "q2amg/matrix_market.hpp"
#include "q2amg/mesh.hpp"
#include "q2amg/assembly.hpp"
#include "q2amg/picard.hpp"
#include "q2amg/coarsen.hpp"
#include "q2amg/emin.hpp"
#include "q2amg/smoothers.hpp"
#include "q2amg/krylov.hpp"
#include "q2amg/hierarchy.hpp"
#include "q2amg/diagnostics.hpp"
#include "q2amg/config.hpp"
#include "q2amg/experiment.hpp"

#endif  // Q2AMG_Q2AMG_HPP
