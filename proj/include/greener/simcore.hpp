#pragma once

// Warp-level pipeline model of one SM: per-warp in-order fetch/decode into a
// two-entry queue, single issue per cycle, a scoreboard that reserves every
// accessed register (RAW/WAW/WAR/RAR), read-operands one cycle after issue
// and writeback after the opcode latency. Registers are modeled at warp
// granularity; a register must be ON (and not still waking) to be accessed.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "greener/energy.hpp"
#include "greener/gasm.hpp"

namespace greener {

enum class Mode : std::uint8_t { baseline, sleepreg, greener };
enum class SchedulerPolicy : std::uint8_t { lrr, gto };
enum class AccessPhase : std::uint8_t { read, writeback };

std::string_view to_string(Mode m);
std::string_view to_string(SchedulerPolicy s);
std::optional<Mode> parse_mode(std::string_view s);
std::optional<SchedulerPolicy> parse_scheduler(std::string_view s);

inline constexpr std::size_t kDecodeDepth = 2;

struct SimConfig {
  std::uint32_t warps = 8;
  std::uint32_t registers_per_thread = 16;
  /// Physical warp-registers; 0 means warps * registers_per_thread.
  std::uint64_t register_file_size = 0;
  Mode mode = Mode::baseline;
  bool runtime_opt = false;
  SchedulerPolicy scheduler = SchedulerPolicy::lrr;
  std::uint32_t wake_sleep_cycles = 1;
  std::uint32_t wake_off_cycles = 2;
  /// Keys are opcode classes (alu, compare, branch) or opcode names; an
  /// opcode name takes precedence over its class.
  std::map<std::string, std::uint32_t> opcode_latency = {
      {"alu", 4}, {"compare", 1}, {"branch", 1}};
  std::uint32_t mem_latency = 100;
  PowerParams power;
  std::uint64_t seed = 1;
  /// Probability that a guarded branch (or guarded exit) is taken, unless
  /// its target label appears in loop_trips.
  double branch_taken_prob = 0.5;
  /// label -> n: a guarded branch to the label is taken n times in a row,
  /// then falls through once, per warp.
  std::map<std::string, std::uint32_t> loop_trips;
  std::uint64_t max_cycles = 50'000'000;
  bool trace = false;

  std::uint64_t file_registers() const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  std::uint32_t latency(const Instruction& i) const;

  bool operator==(const SimConfig&) const = default;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Power state of every physical warp-register. Warp w owns the general
/// registers [w * R, (w + 1) * R); anything above is unallocated. Predicate,
/// offset and output registers live outside the gated file.
class RegisterFileModel {
 public:
  RegisterFileModel(std::uint32_t warps, std::uint32_t regs_per_thread,
                    std::uint64_t file_registers, PowerState allocated,
                    PowerState unallocated);

  static bool gated(Register r) { return r.kind == RegKind::general; }

  std::size_t size() const { return state_.size(); }
  std::size_t physical(std::uint32_t warp, Register r) const;
  bool allocated(std::size_t phys) const { return phys < allocated_; }

  PowerState state(std::size_t phys) const { return state_[phys]; }
  /// Cycle at which a wake-up completes; accesses need ready_at <= now.
  std::uint64_t ready_at(std::size_t phys) const { return ready_at_[phys]; }
  bool accessible(std::size_t phys, std::uint64_t now) const {
    return state_[phys] == PowerState::on && ready_at_[phys] <= now;
  }

  void set_state(std::size_t phys, PowerState s);
  /// Starts a wake-up; the register counts as ON from now on.
  void begin_wake(std::size_t phys, std::uint64_t ready_at);

  StateCensus census() const { return census_; }
  std::span<const PowerState> states() const { return state_; }

 private:
  std::uint32_t regs_per_thread_;
  std::size_t allocated_;
  std::vector<PowerState> state_;
  std::vector<std::uint64_t> ready_at_;
  StateCensus census_;
};

/// baseline: everything ON; sleepreg: allocated ON, unallocated OFF;
/// greener: everything OFF until first written.
RegisterFileModel initial_register_states(const SimConfig& cfg);

/// Per-warp record of decoded, not yet written back instructions.
class LookupTable {
 public:
  explicit LookupTable(std::uint32_t warps) : entries_(warps) {}

  void insert(std::uint32_t warp, std::uint64_t seq, InstrId pc,
              std::vector<Register> regs);
  void remove(std::uint32_t warp, std::uint64_t seq);
  /// An entry of `warp` with a pc other than `pc` that accesses `r`.
  bool references_other(std::uint32_t warp, InstrId pc, Register r) const;
  std::size_t occupancy(std::uint32_t warp) const { return entries_[warp].size(); }

 private:
  struct Entry {
    std::uint64_t seq;
    InstrId pc;
    std::vector<Register> regs;
  };
  std::vector<std::vector<Entry>> entries_;
};

/// State the mode requests for `r` right after `i` accessed it.
PowerState post_access_target(Mode mode, const Instruction& i, Register r,
                              AccessPhase phase);

struct PostAccess {
  PowerState before;
  PowerState after;
  PowerState target;
  bool overridden = false;  // runtime optimization kept the register ON
};

/// Applies the post-access state for a gated register just accessed by `i`.
/// Baseline leaves the file untouched.
PostAccess apply_post_access_state(RegisterFileModel& rf,
                                   const LookupTable& table,
                                   const SimConfig& cfg, std::uint32_t warp,
                                   const Instruction& i, Register r,
                                   AccessPhase phase);

/// Priority order in which warps are considered this cycle.
std::vector<std::uint32_t> scheduler_order(SchedulerPolicy policy,
                                           std::uint32_t warps,
                                           std::optional<std::uint32_t> last_issued);

/// First ready warp in priority order.
std::optional<std::uint32_t> scheduler_pick(SchedulerPolicy policy,
                                            const std::vector<bool>& ready,
                                            std::optional<std::uint32_t> last_issued);

enum class TraceKind : std::uint8_t {
  read,
  write,
  wake_begin,
  wake_end,
  state_change,
  issue,
  stall_scoreboard,
  stall_wake,
};
std::string_view to_string(TraceKind k);

struct TraceEvent {
  std::uint64_t cycle;
  std::uint32_t warp;
  TraceKind event;
  std::optional<Register> reg;
  std::string detail;

  bool operator==(const TraceEvent&) const = default;
};

struct SimCounters {
  std::uint64_t wake_sleep_to_on = 0;
  std::uint64_t wake_off_to_on = 0;
  std::uint64_t runtime_opt_overrides = 0;
  std::uint64_t scoreboard_stalls = 0;
  std::uint64_t wake_stalls = 0;
  std::uint64_t idle_cycles = 0;
  std::uint64_t issued = 0;
  std::uint64_t lookup_table_peak = 0;
  /// Access to a non-ON register, a SLEEP/OFF decision the lookup table
  /// should have vetoed, a Sleep-Reg postcondition miss, a scoreboard
  /// hazard or out-of-order issue. Always zero for a correct model.
  std::uint64_t invariant_violations = 0;

  bool operator==(const SimCounters&) const = default;
};

struct SimResult {
  Mode mode = Mode::baseline;
  std::uint64_t program_hash = 0;
  std::uint64_t cycles = 0;
  std::vector<std::uint64_t> warp_completion;
  EnergyLedger energy;
  SimCounters counters;
  std::vector<PowerState> initial_states;
  std::vector<PowerState> final_states;
  std::vector<TraceEvent> trace;
};

/// Runs every warp of `p` to exit. Throws SimError for an unannotated
/// program in greener mode, a general register index >= R, or exceeding
/// max_cycles; std::invalid_argument for a bad config.
SimResult simulate(const Program& p, const SimConfig& cfg);

}  // namespace greener
