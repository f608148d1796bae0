#pragma once

// Brute-force references for the dataflow solvers. They walk explicit paths
// of the CFG and share no code with the worklist implementation; intended
// for small graphs in tests.

#include "greener/cfg.hpp"
#include "greener/dataflow.hpp"

namespace greener {

/// Maximum over paths leaving `point` of the 1-based index of the first
/// instruction accessing `r`; INF as soon as some path runs past W
/// instructions or reaches Exit first.
Distance distance_oracle(const Cfg& c, Threshold w, ProgramPoint point,
                         Register r);

/// Whether some path from `point` reaches a use of `r` before a definition.
bool liveness_oracle(const Cfg& c, ProgramPoint point, Register r);

}  // namespace greener
