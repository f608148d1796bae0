#pragma once

// Register-file leakage accounting. Energy is kept as an integer number of
// attojoules so that accrual is exact and order independent: one register
// spending one cycle in a state costs a fixed integer quantum.

#include <array>
#include <cstdint>
#include <string_view>

#include "greener/gasm.hpp"

namespace greener {

/// Leakage powers are per warp-register. The defaults are normalized
/// (ON = 1) since only ratios between modes are meaningful; the transition
/// energies are the default sleep-transistor figures.
struct PowerParams {
  double p_on = 1.0;
  double p_sleep = 0.2;
  double p_off = 0.02;
  double e_sleep_transition = 0.0633e-9;  // J, SLEEP <-> ON
  double e_off_transition = 0.198e-9;     // J, OFF <-> ON
  double clock_hz = 732e6;

  /// Throws std::invalid_argument unless p_on >= p_sleep >= p_off >= 0,
  /// transition energies are non-negative and the clock is positive.
  void validate() const;
  bool operator==(const PowerParams&) const = default;
};

enum class TransitionKind : std::uint8_t {
  sleep_to_on,
  on_to_sleep,
  off_to_on,
  on_to_off,
  sleep_to_off,
};
inline constexpr std::size_t kTransitionKinds = 5;

std::string_view to_string(TransitionKind k);
TransitionKind transition_kind(PowerState from, PowerState to);

struct StateCensus {
  std::uint64_t on = 0;
  std::uint64_t sleep = 0;
  std::uint64_t off = 0;

  std::uint64_t total() const { return on + sleep + off; }
};

using Attojoules = std::uint64_t;

class EnergyLedger {
 public:
  EnergyLedger(const PowerParams& params, std::uint64_t file_registers);

  /// Adds one cycle of leakage. The census must cover the whole file.
  void accrue_cycle(const StateCensus& census);
  void record_transition(TransitionKind kind);

  const PowerParams& params() const { return params_; }
  std::uint64_t file_registers() const { return file_registers_; }

  /// Energy of one register for one cycle in state `s`.
  Attojoules quantum(PowerState s) const { return quantum_[idx(s)]; }
  Attojoules transition_quantum(TransitionKind k) const;

  /// Register-cycles spent in `s`.
  std::uint64_t tally(PowerState s) const { return tally_[idx(s)]; }
  std::uint64_t cycles() const { return cycles_; }
  std::uint64_t count(TransitionKind k) const {
    return counts_[static_cast<std::size_t>(k)];
  }

  Attojoules leakage_aj() const { return leakage_aj_; }
  Attojoules transition_aj() const { return transition_aj_; }
  /// Leakage recomputed from the per-state tallies.
  Attojoules leakage_from_tallies() const;

  double leakage_j() const { return static_cast<double>(leakage_aj_) * 1e-18; }
  double transition_j() const { return static_cast<double>(transition_aj_) * 1e-18; }
  double total_j() const { return leakage_j() + transition_j(); }

  bool operator==(const EnergyLedger&) const = default;

 private:
  static std::size_t idx(PowerState s) { return static_cast<std::size_t>(s); }

  PowerParams params_;
  std::uint64_t file_registers_;
  std::array<Attojoules, 3> quantum_{};
  Attojoules e_sleep_aj_ = 0;
  Attojoules e_off_aj_ = 0;
  std::array<std::uint64_t, 3> tally_{};
  std::array<std::uint64_t, kTransitionKinds> counts_{};
  std::uint64_t cycles_ = 0;
  Attojoules leakage_aj_ = 0;
  Attojoules transition_aj_ = 0;
};

/// Run-time lookup table size: warps * entries * (pc_bits + log2(R) * r).
/// log2 rounds up when R is not a power of two.
std::uint64_t lookup_table_bits(std::uint64_t max_warps,
                                std::uint64_t entries_per_warp,
                                std::uint64_t pc_bits,
                                std::uint64_t regs_per_thread,
                                std::uint64_t operand_slots);

/// Extra scoreboard storage to hold four source register numbers per warp:
/// 4 * warps * log2(R).
std::uint64_t scoreboard_overhead_bits(std::uint64_t max_warps,
                                       std::uint64_t regs_per_thread);

}  // namespace greener
