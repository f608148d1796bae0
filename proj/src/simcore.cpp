#include "greener/simcore.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "greener/annotator.hpp"
#include "greener/cfg.hpp"

namespace greener {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::baseline:
      return "baseline";
    case Mode::sleepreg:
      return "sleepreg";
    case Mode::greener:
      return "greener";
  }
  return "?";
}

std::string_view to_string(SchedulerPolicy s) {
  return s == SchedulerPolicy::lrr ? "lrr" : "gto";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : {Mode::baseline, Mode::sleepreg, Mode::greener})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

std::optional<SchedulerPolicy> parse_scheduler(std::string_view s) {
  if (s == "lrr") return SchedulerPolicy::lrr;
  if (s == "gto") return SchedulerPolicy::gto;
  return std::nullopt;
}

std::string_view to_string(TraceKind k) {
  switch (k) {
    case TraceKind::read:
      return "read";
    case TraceKind::write:
      return "write";
    case TraceKind::wake_begin:
      return "wake_begin";
    case TraceKind::wake_end:
      return "wake_end";
    case TraceKind::state_change:
      return "state_change";
    case TraceKind::issue:
      return "issue";
    case TraceKind::stall_scoreboard:
      return "stall_scoreboard";
    case TraceKind::stall_wake:
      return "stall_wake";
  }
  return "?";
}

// ---------------------------------------------------------------- config

std::uint64_t SimConfig::file_registers() const {
  return register_file_size ? register_file_size
                            : std::uint64_t{warps} * registers_per_thread;
}

void SimConfig::validate() const {
  if (warps == 0) throw std::invalid_argument("warps must be >= 1");
  if (registers_per_thread == 0)
    throw std::invalid_argument("registers_per_thread must be >= 1");
  if (file_registers() < std::uint64_t{warps} * registers_per_thread)
    throw std::invalid_argument(
        "register_file_size smaller than warps * registers_per_thread");
  if (wake_off_cycles < wake_sleep_cycles)
    throw std::invalid_argument("wake_off_cycles must be >= wake_sleep_cycles");
  if (mem_latency == 0) throw std::invalid_argument("mem_latency must be >= 1");
  for (const auto& [k, v] : opcode_latency)
    if (v == 0) throw std::invalid_argument("opcode latency for '" + k + "' must be >= 1");
  if (!(branch_taken_prob >= 0 && branch_taken_prob <= 1))
    throw std::invalid_argument("branch_taken_prob must be in [0, 1]");
  power.validate();
}

namespace {

bool has_memref(const Instruction& i) {
  auto mem = [](const Operand& o) { return std::holds_alternative<MemRef>(o); };
  return std::any_of(i.sources.begin(), i.sources.end(), mem) ||
         std::any_of(i.destinations.begin(), i.destinations.end(), mem);
}

std::string_view opcode_class(const Instruction& i) {
  const std::string& op = i.opcode;
  if (op == "bra" || op == "exit" || op == "ssy" || op == "nop" || op == "bar" ||
      op == "ret")
    return "branch";
  if (op == "set" || op == "setp") return "compare";
  if (op == "ld" || op == "st" || (op == "mov" && has_memref(i))) return "mem";
  return "alu";
}

}  // namespace

std::uint32_t SimConfig::latency(const Instruction& i) const {
  if (auto it = opcode_latency.find(i.opcode); it != opcode_latency.end())
    return it->second;
  std::string_view cls = opcode_class(i);
  if (cls == "mem") return mem_latency;
  if (auto it = opcode_latency.find(std::string(cls)); it != opcode_latency.end())
    return it->second;
  return 1;
}

// ---------------------------------------------------------- register file

RegisterFileModel::RegisterFileModel(std::uint32_t warps,
                                     std::uint32_t regs_per_thread,
                                     std::uint64_t file_registers,
                                     PowerState allocated, PowerState unallocated)
    : regs_per_thread_(regs_per_thread),
      allocated_(std::size_t{warps} * regs_per_thread),
      state_(file_registers, unallocated),
      ready_at_(file_registers, 0) {
  if (allocated_ > file_registers)
    throw std::invalid_argument("register file too small for allocation");
  std::fill_n(state_.begin(), allocated_, allocated);
  for (PowerState s : state_) {
    if (s == PowerState::on) ++census_.on;
    if (s == PowerState::sleep) ++census_.sleep;
    if (s == PowerState::off) ++census_.off;
  }
}

std::size_t RegisterFileModel::physical(std::uint32_t warp, Register r) const {
  if (!gated(r) || r.index >= regs_per_thread_)
    throw std::out_of_range("no physical register for " + to_string(r));
  return std::size_t{warp} * regs_per_thread_ + r.index;
}

void RegisterFileModel::set_state(std::size_t phys, PowerState s) {
  auto bucket = [this](PowerState x) -> std::uint64_t& {
    return x == PowerState::on ? census_.on
                               : x == PowerState::sleep ? census_.sleep : census_.off;
  };
  --bucket(state_[phys]);
  ++bucket(s);
  state_[phys] = s;
}

void RegisterFileModel::begin_wake(std::size_t phys, std::uint64_t ready_at) {
  set_state(phys, PowerState::on);
  ready_at_[phys] = ready_at;
}

RegisterFileModel initial_register_states(const SimConfig& cfg) {
  PowerState alloc = PowerState::on, unalloc = PowerState::on;
  if (cfg.mode == Mode::sleepreg) unalloc = PowerState::off;
  if (cfg.mode == Mode::greener) alloc = unalloc = PowerState::off;
  return RegisterFileModel(cfg.warps, cfg.registers_per_thread,
                           cfg.file_registers(), alloc, unalloc);
}

// ----------------------------------------------------------- lookup table

void LookupTable::insert(std::uint32_t warp, std::uint64_t seq, InstrId pc,
                         std::vector<Register> regs) {
  entries_[warp].push_back({seq, pc, std::move(regs)});
}

void LookupTable::remove(std::uint32_t warp, std::uint64_t seq) {
  auto& v = entries_[warp];
  v.erase(std::remove_if(v.begin(), v.end(),
                         [seq](const Entry& e) { return e.seq == seq; }),
          v.end());
}

bool LookupTable::references_other(std::uint32_t warp, InstrId pc,
                                   Register r) const {
  for (const Entry& e : entries_[warp])
    if (e.pc != pc && std::find(e.regs.begin(), e.regs.end(), r) != e.regs.end())
      return true;
  return false;
}

// ------------------------------------------------------ post-access state

PowerState post_access_target(Mode mode, const Instruction& i, Register r,
                              AccessPhase phase) {
  if (mode == Mode::baseline) return PowerState::on;
  if (mode == Mode::sleepreg) return PowerState::sleep;
  auto slots = encodable_slots(i);
  if (!i.power_list || i.power_list->size() != slots.size())
    return EncodingPolicy::default_state_for_unencoded;
  bool has_dest_slot =
      !i.destinations.empty() && std::holds_alternative<Register>(i.destinations[0]);
  if (phase == AccessPhase::writeback) {
    if (has_dest_slot && slots[0] == r) return (*i.power_list)[0];
  } else {
    for (std::size_t k = has_dest_slot ? 1 : 0; k < slots.size(); ++k)
      if (slots[k] == r) return (*i.power_list)[k];
  }
  return EncodingPolicy::default_state_for_unencoded;
}

PostAccess apply_post_access_state(RegisterFileModel& rf, const LookupTable& table,
                                   const SimConfig& cfg, std::uint32_t warp,
                                   const Instruction& i, Register r,
                                   AccessPhase phase) {
  std::size_t phys = rf.physical(warp, r);
  PostAccess out;
  out.before = rf.state(phys);
  out.target = post_access_target(cfg.mode, i, r, phase);
  out.after = out.before;
  if (cfg.mode == Mode::baseline) return out;
  PowerState next = out.target;
  if (cfg.runtime_opt && next != PowerState::on &&
      table.references_other(warp, i.id, r)) {
    next = PowerState::on;
    out.overridden = true;
  }
  if (next != out.before) rf.set_state(phys, next);
  out.after = next;
  return out;
}

// -------------------------------------------------------------- scheduler

std::vector<std::uint32_t> scheduler_order(SchedulerPolicy policy,
                                           std::uint32_t warps,
                                           std::optional<std::uint32_t> last) {
  std::vector<std::uint32_t> order;
  order.reserve(warps);
  if (policy == SchedulerPolicy::lrr) {
    std::uint32_t start = last ? (*last + 1) % warps : 0;
    for (std::uint32_t k = 0; k < warps; ++k) order.push_back((start + k) % warps);
  } else {
    if (last) order.push_back(*last);
    for (std::uint32_t w = 0; w < warps; ++w)
      if (!last || w != *last) order.push_back(w);
  }
  return order;
}

std::optional<std::uint32_t> scheduler_pick(SchedulerPolicy policy,
                                            const std::vector<bool>& ready,
                                            std::optional<std::uint32_t> last) {
  auto n = static_cast<std::uint32_t>(ready.size());
  if (n == 0) return std::nullopt;
  for (std::uint32_t w : scheduler_order(policy, n, last))
    if (ready[w]) return w;
  return std::nullopt;
}

// -------------------------------------------------------------- simulator

namespace {

struct StaticInfo {
  std::vector<Register> uses;
  std::vector<Register> defs;
  std::vector<Register> accesses;
  std::vector<Register> read_only;  // uses that are not also defs
  std::uint32_t latency;
};

struct Decoded {
  std::uint64_t seq;
  InstrId pc;
};

struct InFlight {
  std::uint32_t warp;
  std::uint64_t seq;
  InstrId pc;
  std::uint64_t read_cycle;
  std::uint64_t wb_cycle;
};

struct WarpState {
  InstrId pc = 0;
  bool fetch_done = false;
  bool finished = false;
  std::deque<Decoded> queue;
  std::uint32_t in_flight = 0;
  std::uint64_t last_issued_seq = 0;
  std::vector<Register> reserved;
  std::map<InstrId, std::uint32_t> taken_streak;
  std::mt19937_64 rng;
};

class Simulator {
 public:
  Simulator(const Program& p, const SimConfig& cfg)
      : p_(p),
        cfg_(cfg),
        rf_(initial_register_states(cfg)),
        table_(cfg.warps),
        warps_(cfg.warps) {
    result_.mode = cfg.mode;
    result_.program_hash = program_hash(p);
    result_.energy = EnergyLedger(cfg.power, cfg.file_registers());
    result_.initial_states.assign(rf_.states().begin(), rf_.states().end());
    result_.warp_completion.assign(cfg.warps, 0);
    for (const auto& ins : p.instructions) {
      StaticInfo s;
      s.uses = register_uses(ins);
      s.defs = register_defs(ins);
      s.accesses = register_accesses(ins);
      for (Register r : s.uses)
        if (std::find(s.defs.begin(), s.defs.end(), r) == s.defs.end())
          s.read_only.push_back(r);
      s.latency = cfg.latency(ins);
      info_.push_back(std::move(s));
    }
    for (std::uint32_t w = 0; w < cfg.warps; ++w)
      warps_[w].rng.seed(cfg.seed * 0x9e3779b97f4a7c15ULL + w);
    if (p.empty())
      for (auto& w : warps_) w.fetch_done = w.finished = true;
  }

  SimResult run() {
    std::uint64_t cycle = 0;
    while (!all_finished()) {
      if (cycle >= cfg_.max_cycles)
        throw SimError("simulation exceeded max_cycles (" +
                       std::to_string(cfg_.max_cycles) + ")");
      finish_wakes(cycle);
      writeback(cycle);
      read_operands(cycle);
      issue(cycle);
      fetch(cycle);
      retire_warps(cycle);
      result_.energy.accrue_cycle(rf_.census());
      ++cycle;
    }
    result_.cycles = cycle;
    result_.final_states.assign(rf_.states().begin(), rf_.states().end());
    return std::move(result_);
  }

 private:
  bool all_finished() const {
    return std::all_of(warps_.begin(), warps_.end(),
                       [](const WarpState& w) { return w.finished; });
  }

  void emit(std::uint64_t cycle, std::uint32_t warp, TraceKind k,
            std::optional<Register> r, std::string detail) {
    if (cfg_.trace) result_.trace.push_back({cycle, warp, k, r, std::move(detail)});
  }

  static std::string pc_text(InstrId pc) { return "pc=" + std::to_string(pc); }

  void violation() { ++result_.counters.invariant_violations; }

  void check_access(std::uint64_t cycle, std::uint32_t warp, Register r) {
    if (RegisterFileModel::gated(r) && !rf_.accessible(rf_.physical(warp, r), cycle))
      violation();
  }

  void finish_wakes(std::uint64_t cycle) {
    auto done = std::stable_partition(
        pending_.begin(), pending_.end(),
        [cycle](const auto& w) { return std::get<2>(w) > cycle; });
    for (auto it = done; it != pending_.end(); ++it)
      emit(cycle, std::get<0>(*it), TraceKind::wake_end, std::get<1>(*it), "");
    pending_.erase(done, pending_.end());
  }

  void post_access(std::uint64_t cycle, std::uint32_t warp, InstrId pc,
                   Register r, AccessPhase phase) {
    if (!RegisterFileModel::gated(r)) return;
    PostAccess pa = apply_post_access_state(rf_, table_, cfg_, warp, p_[pc], r, phase);
    if (pa.overridden) ++result_.counters.runtime_opt_overrides;
    if (pa.after != pa.before) {
      if (cfg_.runtime_opt && table_.references_other(warp, pc, r)) violation();
      result_.energy.record_transition(transition_kind(pa.before, pa.after));
      emit(cycle, warp, TraceKind::state_change, r,
           std::string(to_string(pa.before)) + "->" + std::string(to_string(pa.after)));
    }
    if (cfg_.mode == Mode::sleepreg && pa.after != PowerState::sleep && !pa.overridden)
      violation();
  }

  void release(WarpState& w, Register r) {
    auto it = std::find(w.reserved.begin(), w.reserved.end(), r);
    if (it != w.reserved.end()) w.reserved.erase(it);
  }

  void writeback(std::uint64_t cycle) {
    for (auto it = in_flight_.begin(); it != in_flight_.end();) {
      if (it->wb_cycle != cycle) {
        ++it;
        continue;
      }
      WarpState& w = warps_[it->warp];
      for (Register r : info_[it->pc].defs) {
        check_access(cycle, it->warp, r);
        emit(cycle, it->warp, TraceKind::write, r, pc_text(it->pc));
        post_access(cycle, it->warp, it->pc, r, AccessPhase::writeback);
      }
      for (Register r : info_[it->pc].defs) release(w, r);
      table_.remove(it->warp, it->seq);
      --w.in_flight;
      it = in_flight_.erase(it);
    }
  }

  void read_operands(std::uint64_t cycle) {
    for (const InFlight& f : in_flight_) {
      if (f.read_cycle != cycle) continue;
      const StaticInfo& s = info_[f.pc];
      for (Register r : s.uses) {
        check_access(cycle, f.warp, r);
        emit(cycle, f.warp, TraceKind::read, r, pc_text(f.pc));
      }
      // Registers also written by this instruction settle at writeback.
      for (Register r : s.read_only) {
        post_access(cycle, f.warp, f.pc, r, AccessPhase::read);
        release(warps_[f.warp], r);
      }
    }
  }

  void signal_wake(std::uint64_t cycle, std::uint32_t warp, Register r) {
    std::size_t phys = rf_.physical(warp, r);
    PowerState from = rf_.state(phys);
    if (from == PowerState::on) return;
    std::uint32_t lat =
        from == PowerState::sleep ? cfg_.wake_sleep_cycles : cfg_.wake_off_cycles;
    rf_.begin_wake(phys, cycle + lat);
    result_.energy.record_transition(transition_kind(from, PowerState::on));
    if (from == PowerState::sleep)
      ++result_.counters.wake_sleep_to_on;
    else
      ++result_.counters.wake_off_to_on;
    emit(cycle, warp, TraceKind::wake_begin, r,
         std::string(to_string(from)) + "->ON");
    if (lat == 0)
      emit(cycle, warp, TraceKind::wake_end, r, "");
    else
      pending_.emplace_back(warp, r, cycle + lat);
  }

  void issue(std::uint64_t cycle) {
    bool issued = false;
    for (std::uint32_t wi : scheduler_order(cfg_.scheduler, cfg_.warps, last_issued_)) {
      WarpState& w = warps_[wi];
      if (w.finished || w.queue.empty()) continue;
      const Decoded head = w.queue.front();
      const StaticInfo& s = info_[head.pc];

      bool conflict = std::any_of(s.accesses.begin(), s.accesses.end(), [&](Register r) {
        return std::find(w.reserved.begin(), w.reserved.end(), r) != w.reserved.end();
      });
      if (conflict) {
        ++result_.counters.scoreboard_stalls;
        emit(cycle, wi, TraceKind::stall_scoreboard, std::nullopt, pc_text(head.pc));
        continue;
      }

      bool ready = true;
      for (Register r : s.accesses) {
        if (!RegisterFileModel::gated(r)) continue;
        signal_wake(cycle, wi, r);
        if (!rf_.accessible(rf_.physical(wi, r), cycle)) ready = false;
      }
      if (!ready) {
        ++result_.counters.wake_stalls;
        emit(cycle, wi, TraceKind::stall_wake, std::nullopt, pc_text(head.pc));
        continue;
      }

      // Independent hazard check against the in-flight list.
      for (const InFlight& f : in_flight_) {
        if (f.warp != wi) continue;
        const StaticInfo& o = info_[f.pc];
        const auto& held = f.read_cycle > cycle ? o.accesses : o.defs;
        for (Register r : s.accesses)
          if (std::find(held.begin(), held.end(), r) != held.end()) violation();
      }
      if (head.seq <= w.last_issued_seq && w.last_issued_seq != 0) violation();

      w.queue.pop_front();
      w.last_issued_seq = head.seq;
      for (Register r : s.accesses) w.reserved.push_back(r);
      in_flight_.push_back({wi, head.seq, head.pc, cycle + 1, cycle + 1 + s.latency});
      ++w.in_flight;
      ++result_.counters.issued;
      emit(cycle, wi, TraceKind::issue, std::nullopt, pc_text(head.pc));
      last_issued_ = wi;
      issued = true;
      break;
    }
    if (!issued) ++result_.counters.idle_cycles;
  }

  bool take_branch(WarpState& w, const Instruction& ins) {
    if (!ins.guard) return true;
    if (ins.is_branch()) {
      if (auto it = cfg_.loop_trips.find(ins.branch_target());
          it != cfg_.loop_trips.end()) {
        std::uint32_t& streak = w.taken_streak[ins.id];
        if (streak < it->second) {
          ++streak;
          return true;
        }
        streak = 0;
        return false;
      }
    }
    double u = static_cast<double>(w.rng() >> 11) * 0x1.0p-53;
    return u < cfg_.branch_taken_prob;
  }

  void fetch(std::uint64_t) {
    for (std::uint32_t wi = 0; wi < cfg_.warps; ++wi) {
      WarpState& w = warps_[wi];
      if (w.fetch_done || w.queue.size() >= kDecodeDepth) continue;
      const Instruction& ins = p_[w.pc];
      std::uint64_t seq = ++seq_;
      w.queue.push_back({seq, ins.id});
      table_.insert(wi, seq, ins.id, info_[ins.id].accesses);
      result_.counters.lookup_table_peak =
          std::max<std::uint64_t>(result_.counters.lookup_table_peak, table_.occupancy(wi));
      if (ins.is_branch()) {
        w.pc = take_branch(w, ins) ? p_.labels.at(ins.branch_target()) : ins.id + 1;
      } else if (ins.is_exit()) {
        if (take_branch(w, ins))
          w.fetch_done = true;
        else
          w.pc = ins.id + 1;
      } else {
        w.pc = ins.id + 1;
      }
    }
  }

  void retire_warps(std::uint64_t cycle) {
    for (std::uint32_t wi = 0; wi < cfg_.warps; ++wi) {
      WarpState& w = warps_[wi];
      if (!w.finished && w.fetch_done && w.queue.empty() && w.in_flight == 0) {
        w.finished = true;
        result_.warp_completion[wi] = cycle;
      }
    }
  }

  const Program& p_;
  const SimConfig& cfg_;
  RegisterFileModel rf_;
  LookupTable table_;
  std::vector<WarpState> warps_;
  std::vector<StaticInfo> info_;
  std::vector<InFlight> in_flight_;
  std::vector<std::tuple<std::uint32_t, Register, std::uint64_t>> pending_;
  std::optional<std::uint32_t> last_issued_;
  std::uint64_t seq_ = 0;
  SimResult result_{Mode::baseline, 0, 0, {}, EnergyLedger(PowerParams{}, 0), {}, {}, {}, {}};
};

}  // namespace

SimResult simulate(const Program& p, const SimConfig& cfg) {
  cfg.validate();
  if (cfg.mode == Mode::greener && !is_annotated(p))
    throw SimError("greener mode needs a power-annotated program");
  for (const auto& ins : p.instructions)
    for (Register r : register_accesses(ins))
      if (RegisterFileModel::gated(r) && r.index >= cfg.registers_per_thread)
        throw SimError("register $" + to_string(r) + " at instruction " +
                       std::to_string(ins.id) + " exceeds registers_per_thread (" +
                       std::to_string(cfg.registers_per_thread) + ")");
  try {
    build_cfg(p);
  } catch (const CfgError& e) {
    throw SimError(e.what());
  }
  return Simulator(p, cfg).run();
}

}  // namespace greener
