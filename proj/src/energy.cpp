#include "greener/energy.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace greener {

namespace {

Attojoules to_aj(double joules) {
  double aj = std::round(joules * 1e18);
  if (!(aj >= 0) || aj > 9.0e18)
    throw std::invalid_argument("energy quantum out of range: " +
                                std::to_string(joules) + " J");
  return static_cast<Attojoules>(aj);
}

Attojoules checked_add(Attojoules a, Attojoules b) {
  Attojoules r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("energy ledger overflow");
  return r;
}

Attojoules checked_mul(std::uint64_t a, Attojoules b) {
  Attojoules r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("energy ledger overflow");
  return r;
}

std::uint64_t ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(x - 1));
}

}  // namespace

void PowerParams::validate() const {
  if (!(p_off >= 0 && p_sleep >= p_off && p_on >= p_sleep))
    throw std::invalid_argument("power params need p_on >= p_sleep >= p_off >= 0");
  if (!(e_sleep_transition >= 0 && e_off_transition >= 0))
    throw std::invalid_argument("transition energies must be non-negative");
  if (!(clock_hz > 0)) throw std::invalid_argument("clock_hz must be positive");
}

std::string_view to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::sleep_to_on:
      return "sleep_to_on";
    case TransitionKind::on_to_sleep:
      return "on_to_sleep";
    case TransitionKind::off_to_on:
      return "off_to_on";
    case TransitionKind::on_to_off:
      return "on_to_off";
    case TransitionKind::sleep_to_off:
      return "sleep_to_off";
  }
  return "?";
}

TransitionKind transition_kind(PowerState from, PowerState to) {
  using P = PowerState;
  if (from == P::sleep && to == P::on) return TransitionKind::sleep_to_on;
  if (from == P::on && to == P::sleep) return TransitionKind::on_to_sleep;
  if (from == P::off && to == P::on) return TransitionKind::off_to_on;
  if (from == P::on && to == P::off) return TransitionKind::on_to_off;
  if (from == P::sleep && to == P::off) return TransitionKind::sleep_to_off;
  throw std::invalid_argument("no transition from " + std::string(to_string(from)) +
                              " to " + std::string(to_string(to)));
}

EnergyLedger::EnergyLedger(const PowerParams& params, std::uint64_t file_registers)
    : params_(params), file_registers_(file_registers) {
  params_.validate();
  quantum_[idx(PowerState::on)] = to_aj(params_.p_on / params_.clock_hz);
  quantum_[idx(PowerState::sleep)] = to_aj(params_.p_sleep / params_.clock_hz);
  quantum_[idx(PowerState::off)] = to_aj(params_.p_off / params_.clock_hz);
  e_sleep_aj_ = to_aj(params_.e_sleep_transition);
  e_off_aj_ = to_aj(params_.e_off_transition);
}

void EnergyLedger::accrue_cycle(const StateCensus& census) {
  if (census.total() != file_registers_)
    throw std::invalid_argument("census covers " + std::to_string(census.total()) +
                                " registers, file has " +
                                std::to_string(file_registers_));
  Attojoules e = checked_mul(census.on, quantum(PowerState::on));
  e = checked_add(e, checked_mul(census.sleep, quantum(PowerState::sleep)));
  e = checked_add(e, checked_mul(census.off, quantum(PowerState::off)));
  leakage_aj_ = checked_add(leakage_aj_, e);
  tally_[idx(PowerState::on)] += census.on;
  tally_[idx(PowerState::sleep)] += census.sleep;
  tally_[idx(PowerState::off)] += census.off;
  ++cycles_;
}

Attojoules EnergyLedger::transition_quantum(TransitionKind k) const {
  switch (k) {
    case TransitionKind::sleep_to_on:
    case TransitionKind::on_to_sleep:
      return e_sleep_aj_;
    default:
      return e_off_aj_;
  }
}

void EnergyLedger::record_transition(TransitionKind kind) {
  transition_aj_ = checked_add(transition_aj_, transition_quantum(kind));
  ++counts_[static_cast<std::size_t>(kind)];
}

Attojoules EnergyLedger::leakage_from_tallies() const {
  Attojoules e = 0;
  for (auto s : {PowerState::on, PowerState::sleep, PowerState::off})
    e = checked_add(e, checked_mul(tally(s), quantum(s)));
  return e;
}

std::uint64_t lookup_table_bits(std::uint64_t max_warps,
                                std::uint64_t entries_per_warp,
                                std::uint64_t pc_bits,
                                std::uint64_t regs_per_thread,
                                std::uint64_t operand_slots) {
  return max_warps * entries_per_warp *
         (pc_bits + ceil_log2(regs_per_thread) * operand_slots);
}

std::uint64_t scoreboard_overhead_bits(std::uint64_t max_warps,
                                       std::uint64_t regs_per_thread) {
  return 4 * max_warps * ceil_log2(regs_per_thread);
}

}  // namespace greener
