#pragma once

#include <iosfwd>
#include <map>
#include <utility>

#include <json.hpp>

#include "greener/simcore.hpp"

namespace greener {

/// 100 * (base - x) / base; 0 when base is 0.
double reduction_pct(double base, double x);

/// One report row. Reduction and overhead fields are null without a
/// baseline to compare against.
nlohmann::json run_report(const SimResult& r, const SimResult* baseline = nullptr);

/// Rows for every mode, in mode order, relative to the baseline run when one
/// is present. Throws std::invalid_argument if the runs disagree on the
/// program.
nlohmann::json compare_report(const std::map<Mode, SimResult>& results);

/// `cycle,warp,event,reg,detail`.
void write_trace_csv(std::ostream& os, const SimResult& r);

/// Fraction of a lifetime spent accessing a register.
double activity_fraction(std::uint64_t access_cycles, std::uint64_t lifetime_cycles);

struct ActivityStats {
  /// (warp, register) -> distinct access cycles / warp lifetime.
  std::map<std::pair<std::uint32_t, Register>, double> per_register;
  double mean = 0.0;
};

/// Needs a run with tracing enabled. Registers never accessed by a warp are
/// absent from per_register.
ActivityStats activity_stats(const SimResult& r);

}  // namespace greener
