#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "greener/cfg.hpp"
#include "greener/report.hpp"

namespace greener::testing {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(GREENER_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program dot_annotated() { return parse_program(read_fixture("dot_product.gasm")); }
Program dot_plain() { return strip_power(dot_annotated()); }
Program fork_reuse() { return parse_program(read_fixture("fork_reuse.gasm")); }

InstrId label_id(const Program& p, const std::string& label) {
  auto it = p.labels.find(label);
  if (it == p.labels.end()) throw std::runtime_error("no label " + label);
  return it->second;
}

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool chance(std::mt19937_64& rng, double p) {
  return std::bernoulli_distribution(p)(rng);
}

std::string reg(std::size_t i) { return "$r" + std::to_string(i); }

}  // namespace

Program random_cfg_program(std::mt19937_64& rng, std::size_t max_instr,
                           std::uint32_t regs) {
  std::size_t gprs = regs > 1 ? regs - 1 : 1;
  for (;;) {
    std::size_t n = 1 + pick(rng, max_instr);
    std::ostringstream os;
    for (std::size_t i = 0; i < n; ++i) {
      os << 'L' << i << ": ";
      bool last = i + 1 == n;
      std::size_t kind = pick(rng, 10);
      std::string guard = chance(rng, 0.8) ? "@$p0.ne " : "";
      if (last) {
        if (chance(rng, 0.7))
          os << "exit;\n";
        else
          os << "bra L" << pick(rng, n) << ";\n";
        continue;
      }
      switch (kind) {
        case 0:
          os << guard << "bra L" << pick(rng, n) << ";\n";
          break;
        case 1:
          os << "@$p0.ne exit;\n";
          break;
        case 2:
          os << "set.lt.s32.s32 $p0, " << reg(pick(rng, gprs)) << ", "
             << reg(pick(rng, gprs)) << ";\n";
          break;
        case 3:
          os << "ld.global.u32 " << reg(pick(rng, gprs)) << ", ["
             << reg(pick(rng, gprs)) << "];\n";
          break;
        case 4:
          os << "st.global.u32 [" << reg(pick(rng, gprs)) << "], "
             << reg(pick(rng, gprs)) << ";\n";
          break;
        case 5:
          os << "mov.u32 " << reg(pick(rng, gprs)) << ", 0x00000001;\n";
          break;
        case 6:
          os << "nop;\n";
          break;
        default:
          os << "add.u32 " << reg(pick(rng, gprs)) << ", " << reg(pick(rng, gprs))
             << ", " << reg(pick(rng, gprs)) << ";\n";
      }
    }
    Program p = parse_program(os.str());
    try {
      build_cfg(p);
      return p;
    } catch (const CfgError&) {
    }
  }
}

namespace {

struct KernelWriter {
  std::mt19937_64& rng;
  std::uint32_t regs;
  std::ostringstream os;
  std::map<std::string, std::uint32_t> trips;
  int labels = 0;
  std::string pending_label;

  void line(const std::string& text) {
    os << (pending_label.empty() ? "    " : pending_label + ": ") << text << ";\n";
    pending_label.clear();
  }

  std::string r() { return reg(pick(rng, regs)); }

  void straight() {
    switch (pick(rng, 8)) {
      case 0:
        line("mov.u32 " + r() + ", 0x00000001");
        break;
      case 1:
        line("mad.f32 " + r() + ", " + r() + ", " + r() + ", " + r());
        break;
      case 2:
        line("ld.global.u32 " + r() + ", [" + r() + "]");
        break;
      case 3:
        line("st.global.u32 [" + r() + "], " + r());
        break;
      case 4:
        line("set.gt.s32.s32 $p1, " + r() + ", " + r());
        break;
      case 5:
        line("shl.u32 " + r() + ", " + r() + ", 0x00000002");
        break;
      default:
        line("add.u32 " + r() + ", " + r() + ", " + r());
    }
  }

  void block(int depth) {
    std::size_t items = 2 + pick(rng, 5);
    for (std::size_t k = 0; k < items; ++k) {
      std::size_t what = pick(rng, 10);
      if (depth < 2 && what == 0) {
        std::string l = "L" + std::to_string(labels++);
        pending_label = l;
        straight();
        block(depth + 1);
        line("set.lt.s32.s32 $p0, " + r() + ", " + r());
        line("@$p0.ne bra " + l);
        trips[l] = 1 + static_cast<std::uint32_t>(pick(rng, 3));
      } else if (depth < 2 && what == 1) {
        std::string l = "S" + std::to_string(labels++);
        line("@$p1.ne bra " + l);
        block(depth + 1);
        pending_label = l;
        straight();
      } else {
        straight();
      }
    }
  }
};

}  // namespace

RandomKernel random_kernel(std::mt19937_64& rng, std::uint32_t regs) {
  KernelWriter w{rng, regs, {}, {}, 0, {}};
  w.block(0);
  w.line("exit");
  return {parse_program(w.os.str()), std::move(w.trips)};
}

std::string run_bytes(const SimResult& r) {
  std::ostringstream os;
  os << run_report(r).dump(2) << '\n';
  write_trace_csv(os, r);
  return os.str();
}

SimChecks& sim_checks() {
  static SimChecks checks;
  return checks;
}

namespace {

void check_balance(const SimResult& r, const SimConfig& cfg) {
  std::map<std::size_t, std::int64_t> net;
  for (const TraceEvent& e : r.trace) {
    if (e.event != TraceKind::state_change && e.event != TraceKind::wake_begin) continue;
    if (!e.reg || !RegisterFileModel::gated(*e.reg)) continue;
    std::size_t phys = std::size_t{e.warp} * cfg.registers_per_thread + e.reg->index;
    auto arrow = e.detail.find("->");
    std::string from = e.detail.substr(0, arrow), to = e.detail.substr(arrow + 2);
    if (to == "ON") ++net[phys];
    if (from == "ON") --net[phys];
  }
  for (std::size_t phys = 0; phys < r.final_states.size(); ++phys) {
    std::int64_t expect = (r.final_states[phys] == PowerState::on ? 1 : 0) -
                          (r.initial_states[phys] == PowerState::on ? 1 : 0);
    if (net[phys] != expect)
      throw std::runtime_error("transition balance broken for register " +
                               std::to_string(phys));
  }
}

}  // namespace

SimResult checked_simulate(const Program& p, SimConfig cfg) {
  cfg.trace = true;
  SimResult a = simulate(p, cfg);
  SimResult b = simulate(p, cfg);
  ++sim_checks().runs;
  try {
    if (run_bytes(a) != run_bytes(b)) throw std::runtime_error("non-deterministic run");
    if (a.counters.invariant_violations != 0)
      throw std::runtime_error(std::to_string(a.counters.invariant_violations) +
                               " invariant violations");
    if (a.energy.leakage_from_tallies() != a.energy.leakage_aj())
      throw std::runtime_error("ledger does not close");
    if (a.energy.cycles() != a.cycles) throw std::runtime_error("ledger cycle mismatch");
    check_balance(a, cfg);
  } catch (...) {
    ++sim_checks().failures;
    throw;
  }
  return a;
}

}  // namespace greener::testing
