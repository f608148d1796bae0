#pragma once

#include <vector>

#include "greener/dataflow.hpp"
#include "greener/gasm.hpp"

namespace greener {

struct EncodingPolicy {
  static constexpr int max_dest_slots = 1;
  static constexpr int max_src_slots = 2;
  /// Applied by the hardware to accessed registers that have no slot.
  static constexpr PowerState default_state_for_unencoded = PowerState::sleep;
};

/// Attaches Power(OUT(S), R) for each encodable slot of every non-control
/// instruction. Existing power lists are replaced.
Program annotate(const Program& p, const AnalysisResult& a);

/// Accessed registers that have no encodable slot (second destinations,
/// memory base registers, guard predicates).
std::vector<Register> unencoded_accesses(const Instruction& i);

/// True if every instruction with encodable slots carries a power list.
bool is_annotated(const Program& p);

}  // namespace greener
