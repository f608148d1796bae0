#include "greener/report.hpp"

#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace greener {

double reduction_pct(double base, double x) {
  return base == 0.0 ? 0.0 : 100.0 * (base - x) / base;
}

nlohmann::json run_report(const SimResult& r, const SimResult* baseline) {
  const EnergyLedger& e = r.energy;
  nlohmann::json j;
  j["mode"] = std::string(to_string(r.mode));
  j["cycles"] = r.cycles;
  j["leakage_nj"] = e.leakage_j() * 1e9;
  j["transition_nj"] = e.transition_j() * 1e9;
  j["total_nj"] = e.total_j() * 1e9;
  nlohmann::json t = nlohmann::json::object();
  for (std::size_t k = 0; k < kTransitionKinds; ++k) {
    auto kind = static_cast<TransitionKind>(k);
    t[std::string(to_string(kind))] = e.count(kind);
  }
  j["transitions"] = t;
  j["stalls"] = {{"scoreboard", r.counters.scoreboard_stalls},
                 {"wake", r.counters.wake_stalls},
                 {"idle_cycles", r.counters.idle_cycles}};
  j["runtime_opt_overrides"] = r.counters.runtime_opt_overrides;
  j["lookup_table_peak"] = r.counters.lookup_table_peak;
  j["invariant_violations"] = r.counters.invariant_violations;
  j["warp_completion"] = r.warp_completion;
  if (baseline) {
    j["reduction_vs_baseline_pct"] =
        reduction_pct(baseline->energy.total_j(), e.total_j());
    double cb = static_cast<double>(baseline->cycles);
    j["cycle_overhead_pct"] =
        cb == 0.0 ? 0.0 : 100.0 * (static_cast<double>(r.cycles) - cb) / cb;
  } else {
    j["reduction_vs_baseline_pct"] = nullptr;
    j["cycle_overhead_pct"] = nullptr;
  }
  return j;
}

nlohmann::json compare_report(const std::map<Mode, SimResult>& results) {
  if (results.empty()) throw std::invalid_argument("no results to compare");
  std::uint64_t hash = results.begin()->second.program_hash;
  for (const auto& [mode, r] : results)
    if (r.program_hash != hash)
      throw std::invalid_argument("run '" + std::string(to_string(mode)) +
                                  "' simulated a different program");
  auto base = results.find(Mode::baseline);
  const SimResult* b = base == results.end() ? nullptr : &base->second;
  std::ostringstream hex;
  hex << std::hex << hash;
  nlohmann::json j;
  j["program_hash"] = hex.str();
  j["runs"] = nlohmann::json::array();
  for (const auto& [mode, r] : results) j["runs"].push_back(run_report(r, b));
  return j;
}

void write_trace_csv(std::ostream& os, const SimResult& r) {
  os << "cycle,warp,event,reg,detail\n";
  for (const TraceEvent& e : r.trace)
    os << e.cycle << ',' << e.warp << ',' << to_string(e.event) << ','
       << (e.reg ? to_string(*e.reg) : "") << ',' << e.detail << '\n';
}

double activity_fraction(std::uint64_t access_cycles, std::uint64_t lifetime_cycles) {
  return lifetime_cycles == 0
             ? 0.0
             : static_cast<double>(access_cycles) / static_cast<double>(lifetime_cycles);
}

ActivityStats activity_stats(const SimResult& r) {
  std::map<std::pair<std::uint32_t, Register>, std::set<std::uint64_t>> cycles;
  for (const TraceEvent& e : r.trace)
    if ((e.event == TraceKind::read || e.event == TraceKind::write) && e.reg)
      cycles[{e.warp, *e.reg}].insert(e.cycle);
  ActivityStats s;
  for (const auto& [key, set] : cycles) {
    std::uint64_t lifetime = r.warp_completion.at(key.first) + 1;
    s.per_register[key] = activity_fraction(set.size(), lifetime);
    s.mean += s.per_register[key];
  }
  if (!s.per_register.empty()) s.mean /= static_cast<double>(s.per_register.size());
  return s;
}

}  // namespace greener
