// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "greener/annotator.hpp"
#include "greener/cli.hpp"
#include "greener/dataflow.hpp"
#include "greener/energy.hpp"
#include "greener/oracle.hpp"
#include "greener/report.hpp"
#include "greener/simcore.hpp"
#include "support.hpp"

using namespace greener;
using testing::checked_simulate;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

template <typename T>
std::string show(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Program annotated(const Program& p, Threshold w) { return annotate(p, analyze(p, w)); }

std::size_t count_wakes(const SimResult& r, Register reg, const std::string& detail) {
  return static_cast<std::size_t>(
      std::count_if(r.trace.begin(), r.trace.end(), [&](const TraceEvent& e) {
        return e.event == TraceKind::wake_begin && e.reg == reg &&
               (detail.empty() || e.detail == detail);
      }));
}

// 1
std::string classifier() {
  require(classify(true, true) == PowerState::sleep, "(T,T)");
  require(classify(true, false) == PowerState::on, "(T,F)");
  require(classify(false, true) == PowerState::off, "(F,T)");
  require(classify(false, false) == PowerState::on, "(F,F)");
  return "SLEEP/ON/OFF/ON";
}

// 2
std::string listing_regression() {
  Program plain = testing::dot_plain();
  Program got = annotated(plain, 7);
  Program want = testing::dot_annotated();
  int matched = 0;
  for (int line = 1; line <= 24; ++line) {
    InstrId id = testing::dot_line(line);
    require(got[id].power_list == want[id].power_list,
            "line " + std::to_string(line) + ": " + serialize_program(Program{{got[id]}, {}}));
    ++matched;
  }
  auto slot = [&](int line, std::size_t k) {
    return (*got[testing::dot_line(line)].power_list).at(k);
  };
  require(slot(1, 2) == PowerState::on && slot(1, 1) == PowerState::sleep, "line 1 r0/r8");
  require(slot(11, 2) == PowerState::off, "line 11 r13");
  require(slot(14, 0) == PowerState::sleep && slot(15, 0) == PowerState::sleep,
          "lines 14/15");
  require(slot(22, 0) == PowerState::off, "line 22 r12");
  return std::to_string(matched) + "/24 lines token-identical at W=7";
}

// 3
std::string fork_distance() {
  Program p = testing::fork_reuse();
  AnalysisResult a = analyze(p, 7);
  InstrId s0 = testing::label_id(p, "S0"), s10 = testing::label_id(p, "S10"),
          s1 = testing::label_id(p, "S1");
  InstrId fork = s0 + 1;
  require(a.dist(in_of(s10), gpr(0)) == Distance::finite(2), "near path distance");
  require(a.dist(in_of(s1), gpr(0)).is_inf(), "far path distance");
  require(a.dist(out_of(fork), gpr(0)).is_inf(), "max at the fork");
  require(a.dist(out_of(s0), gpr(0)).is_inf(), "Dist(OUT(S0), r0)");
  require(a.live(out_of(s0), gpr(0)), "r0 live");
  require(a.power(s0, gpr(0)) == PowerState::sleep, "Power(OUT(S0), r0)");
  return "Dist(OUT(S0), r0) = max(2, inf) = inf, Power = SLEEP";
}

// 4
std::string runtime_correction() {
  Program p = annotated(testing::fork_reuse(), 7);
  SimConfig c;
  c.warps = 1;
  c.mode = Mode::greener;
  c.branch_taken_prob = 1.0;
  c.runtime_opt = true;
  SimResult on = checked_simulate(p, c);
  std::size_t on_wakes = count_wakes(on, gpr(0), "SLEEP->ON");
  require(on_wakes == 0, "runtime_opt on: " + std::to_string(on_wakes) + " wakes");
  require(on.counters.runtime_opt_overrides >= 1, "no override recorded");
  c.runtime_opt = false;
  SimResult off = checked_simulate(p, c);
  std::size_t off_wakes = count_wakes(off, gpr(0), "SLEEP->ON");
  require(off_wakes == 1, "runtime_opt off: " + std::to_string(off_wakes) + " wakes");
  return "on: 0 wakes, " + std::to_string(on.counters.runtime_opt_overrides) +
         " override(s); off: 1 SLEEP->ON wake";
}

// 5
std::string oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  std::size_t points = 0;
  const int cases = 1000;
  for (int k = 0; k < cases; ++k) {
    Program p = testing::random_cfg_program(rng, 50, 6);
    Threshold w = 1 + static_cast<Threshold>(k % 8);
    Cfg c = build_cfg(p);
    require(c.registers().size() <= 6, "too many registers");
    LiveMap live = liveness(c);
    DistanceMap dist = distance(c, w);
    for (ProgramPoint pt : program_points(c))
      for (std::size_t r = 0; r < c.registers().size(); ++r) {
        Register reg = c.registers()[r];
        require(dist.at(pt, r) == distance_oracle(c, w, pt, reg),
                "distance mismatch at " + to_string(pt) + " " + to_string(reg) +
                    " W=" + std::to_string(w) + "\n" + serialize_program(p));
        require((live.at(pt, r) != 0) == liveness_oracle(c, pt, reg),
                "liveness mismatch at " + to_string(pt) + " " + to_string(reg) + "\n" +
                    serialize_program(p));
        ++points;
      }
  }
  return std::to_string(cases) + " CFGs, " + std::to_string(points) +
         " (point, register) pairs, 0 mismatches";
}

// 6
std::string inc_saturation() {
  int checks = 0;
  for (Threshold w = 1; w <= 8; ++w) {
    require(inc(Distance::finite(w), w).is_inf(), "inc(W,W)");
    require(inc(Distance::inf(), w).is_inf(), "inc(INF,W)");
    checks += 2;
    for (std::uint32_t k = 1; k < w; ++k, ++checks)
      require(inc(Distance::finite(k), w) == Distance::finite(k + 1), "inc(k,W)");
  }
  return std::to_string(checks) + " cases";
}

// 7
std::string baseline_closed_form() {
  std::mt19937_64 rng(7);
  int runs = 0;
  for (int k = 0; k < 12; ++k) {
    testing::RandomKernel rk = testing::random_kernel(rng, 2 + k % 7);
    SimConfig c;
    c.warps = 1 + static_cast<std::uint32_t>(k % 6);
    c.registers_per_thread = 8 + static_cast<std::uint32_t>(k % 3) * 8;
    c.register_file_size = c.warps * c.registers_per_thread + 16u * (k % 2);
    c.power.clock_hz = k % 2 ? 732e6 : 1e9;
    c.scheduler = k % 3 ? SchedulerPolicy::lrr : SchedulerPolicy::gto;
    c.loop_trips = rk.loop_trips;
    c.seed = static_cast<std::uint64_t>(k);
    SimResult r = checked_simulate(rk.program, c);
    const EnergyLedger& e = r.energy;
    require(e.leakage_aj() == c.file_registers() * r.cycles * e.quantum(PowerState::on),
            "integer closed form");
    double closed = static_cast<double>(c.file_registers()) * c.power.p_on *
                    static_cast<double>(r.cycles) / c.power.clock_hz;
    // Only the per-cycle quantum is rounded (to the nearest attojoule).
    require(std::abs(e.leakage_j() - closed) <= closed * 1e-9, "joule closed form");
    ++runs;
  }
  return std::to_string(runs) + " runs: leakage_aj == N * cycles * q_on";
}

// 8
std::string energy_monotonicity() {
  std::mt19937_64 rng(8);
  int greener_wins = 0;
  for (int k = 0; k < 20; ++k) {
    testing::RandomKernel rk = testing::random_kernel(rng, 2 + k % 7);
    SimConfig c;
    c.warps = 4;
    c.registers_per_thread = 16;
    c.wake_sleep_cycles = 0;
    c.wake_off_cycles = 0;
    c.power.e_sleep_transition = 0;
    c.power.e_off_transition = 0;
    c.loop_trips = rk.loop_trips;
    c.seed = static_cast<std::uint64_t>(k);
    std::map<Mode, std::uint64_t> leak;
    for (Mode m : {Mode::baseline, Mode::sleepreg, Mode::greener}) {
      c.mode = m;
      c.runtime_opt = m == Mode::greener;
      Program p = m == Mode::greener ? annotated(rk.program, kDefaultThreshold)
                                     : rk.program;
      leak[m] = checked_simulate(p, c).energy.leakage_aj();
    }
    require(leak[Mode::sleepreg] <= leak[Mode::baseline],
            "program " + std::to_string(k) + ": sleepreg > baseline");
    require(leak[Mode::greener] <= leak[Mode::baseline],
            "program " + std::to_string(k) + ": greener > baseline");
    require(leak[Mode::greener] <= leak[Mode::sleepreg],
            "program " + std::to_string(k) + ": greener " + show(leak[Mode::greener]) +
                " > sleepreg " + show(leak[Mode::sleepreg]) + "\n" +
                serialize_program(rk.program));
    ++greener_wins;
  }
  return std::to_string(greener_wins) + "/20 programs: greener <= sleepreg <= baseline";
}

// 9
std::string invariants() {
  const testing::SimChecks& s = testing::sim_checks();
  require(s.runs > 0, "no simulations were checked");
  require(s.failures == 0, std::to_string(s.failures) + " checked runs failed");
  return std::to_string(s.runs) + " checked simulations, 0 violations";
}

// 10
std::string overhead_formulas() {
  require(scoreboard_overhead_bits(64, 64) == 1536, "scoreboard bits");
  require(scoreboard_overhead_bits(64, 64) / 8 == 192, "scoreboard bytes");
  std::mt19937_64 rng(10);
  for (int k = 0; k < 10; ++k) {
    std::uint64_t warps = 1 + rng() % 64, w = 1 + rng() % 8, pc = 8 + rng() % 57,
                  regs = 1ull << (1 + rng() % 8), r = 1 + rng() % 4;
    std::uint64_t log2r = 0;
    while ((1ull << log2r) < regs) ++log2r;
    require(lookup_table_bits(warps, w, pc, regs, r) == warps * w * (pc + log2r * r),
            "lookup table tuple " + std::to_string(k));
  }
  return "1536 bits = 192 bytes; 10/10 lookup-table tuples";
}

// 11
std::string transition_constants() {
  PowerParams p;
  require(p.e_sleep_transition == 0.0633e-9, "e_sleep");
  require(p.e_off_transition == 0.198e-9, "e_off");
  EnergyLedger e(p, 1);
  e.record_transition(TransitionKind::sleep_to_on);
  e.record_transition(TransitionKind::on_to_sleep);
  e.record_transition(TransitionKind::off_to_on);
  e.record_transition(TransitionKind::on_to_off);
  e.record_transition(TransitionKind::sleep_to_off);
  require(e.transition_aj() == 2 * 63'300'000ull + 3 * 198'000'000ull, "hand sum");
  require(std::abs(e.transition_j() * 1e9 - (2 * 0.0633 + 3 * 0.198)) < 1e-12,
          "nJ sum");
  return "0.0633 nJ / 0.198 nJ; 5 transitions = 0.7206 nJ";
}

// 12
std::string determinism() {
  const testing::SimChecks& s = testing::sim_checks();
  require(s.failures == 0, "a checked run differed");
  std::string listing = std::string(GREENER_FIXTURE_DIR) + "/dot_product.gasm";
  std::vector<std::string> args = {"compare", listing, "--regs-per-thread", "128",
                                   "--warps", "3", "--seed", "12"};
  std::ostringstream a, b, err;
  require(cli::run(args, a, err) == 0, "compare failed: " + err.str());
  require(cli::run(args, b, err) == 0, "compare failed: " + err.str());
  require(a.str() == b.str(), "compare reports differ");
  return std::to_string(s.runs) + " runs reproduced byte-for-byte (report + trace)";
}

// 13
std::string wake_sweep() {
  Program p = parse_program(
      "    mov.u32 $r1, 0x00000001;\n"
      "    add.u32 $r2, $r2, 0x00000001;\n"
      "    add.u32 $r2, $r2, 0x00000001;\n"
      "    add.u32 $r2, $r2, 0x00000001;\n"
      "    add.u32 $r2, $r2, 0x00000001;\n"
      "    add.u32 $r3, $r1, 0x00000001;\n"
      "    exit;\n");
  Program a = annotated(p, kDefaultThreshold);
  require(a[0].power_list == std::vector<PowerState>{PowerState::sleep},
          "r1 is not put to sleep after its write");
  std::string out;
  for (Mode m : {Mode::sleepreg, Mode::greener}) {
    std::uint64_t prev = 0;
    for (std::uint32_t x : {2u, 3u, 4u}) {
      SimConfig c;
      c.warps = 1;
      c.mode = m;
      c.runtime_opt = m == Mode::greener;
      c.wake_sleep_cycles = x;
      c.wake_off_cycles = 2 * x;
      SimResult r = checked_simulate(m == Mode::greener ? a : p, c);
      require(count_wakes(r, gpr(1), "SLEEP->ON") == 1, "r1 not woken from SLEEP");
      require(r.cycles >= prev, std::string(to_string(m)) + " cycles fell at X=" +
                                    std::to_string(x));
      prev = r.cycles;
      out += (out.empty() ? "" : ", ") + std::string(to_string(m)) + "@" +
             std::to_string(x) + "=" + std::to_string(r.cycles);
    }
  }
  return "cycles " + out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<std::string()> body;
  };
  // Criteria 9 and 12 summarize the simulations run by the others, so they
  // go last.
  std::vector<Criterion> criteria = {
      {1, "classifier table", classifier},
      {2, "annotated listing", listing_regression},
      {3, "fork distance", fork_distance},
      {4, "runtime correction", runtime_correction},
      {5, "oracle equivalence", oracle_equivalence},
      {6, "inc saturation", inc_saturation},
      {7, "baseline closed form", baseline_closed_form},
      {8, "energy monotonicity", energy_monotonicity},
      {10, "overhead formulas", overhead_formulas},
      {11, "transition constants", transition_constants},
      {13, "wake-latency sweep", wake_sweep},
      {9, "simulation invariants", invariants},
      {12, "determinism", determinism},
  };
  std::sort(criteria.begin(), criteria.end() - 2,
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });

  int failed = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.body();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d %-22s %.3fs  %s\n", ok ? "PASS" : "FAIL", c.id,
                c.name, secs, detail.c_str());
    if (!ok) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
