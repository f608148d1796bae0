#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "greener/annotator.hpp"
#include "greener/dataflow.hpp"
#include "greener/gasm.hpp"
#include "greener/simcore.hpp"

namespace greener::testing {

std::string read_fixture(const std::string& name);

/// Dot-product loop as annotated in the fixture file, with the two-instruction
/// prologue and the closing exit.
Program dot_annotated();
Program dot_plain();
/// Instruction id of listing line `line` (1-based, 1..24).
constexpr InstrId dot_line(int line) { return static_cast<InstrId>(line) + 1; }

Program fork_reuse();
InstrId label_id(const Program& p, const std::string& label);

/// Arbitrary control flow over r0..r(regs-2) plus p0, with at most
/// `max_instr` instructions. Regenerated until build_cfg accepts it.
Program random_cfg_program(std::mt19937_64& rng, std::size_t max_instr,
                           std::uint32_t regs);

struct RandomKernel {
  Program program;
  std::map<std::string, std::uint32_t> loop_trips;
};

/// Structured kernel (straight-line code, counted loops, forward skips)
/// over r0..r(regs-1) that always terminates.
RandomKernel random_kernel(std::mt19937_64& rng, std::uint32_t regs);

/// Report JSON plus trace CSV.
std::string run_bytes(const SimResult& r);

struct SimChecks {
  std::uint64_t runs = 0;
  std::uint64_t failures = 0;
};
SimChecks& sim_checks();

/// Simulates twice with tracing on and throws std::runtime_error unless both
/// runs are byte-identical, no invariant was violated, the ledger closes
/// and per-register ON transitions balance against the start/end states.
SimResult checked_simulate(const Program& p, SimConfig cfg);

}  // namespace greener::testing
