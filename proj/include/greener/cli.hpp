#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "greener/dataflow.hpp"
#include "greener/simcore.hpp"

namespace greener::cli {

/// Flags shared by `sim` and `compare`; unset fields fall back to the
/// config file, then to SimConfig defaults.
struct SimFlags {
  std::optional<std::string> config_path;
  std::optional<Mode> mode;
  std::optional<bool> runtime_opt;
  std::optional<SchedulerPolicy> scheduler;
  std::optional<std::uint32_t> warps;
  std::optional<std::uint32_t> regs_per_thread;
  std::optional<std::uint32_t> wake_sleep;
  std::optional<std::uint32_t> wake_off;
  std::optional<std::uint64_t> seed;
};

/// Output paths of "-" mean standard output.

/// Resolves flags over the config file over defaults. `mode` overrides both
/// flags.mode and the file. When no source sets runtime_opt it is on exactly
/// for greener.
SimConfig resolve_config(const SimFlags& flags, std::optional<Mode> mode = std::nullopt);

int cmd_analyze(const std::string& in, Threshold w, const std::string& out_path,
                const std::optional<std::string>& facts_csv,
                const std::optional<std::string>& dot, std::ostream& out,
                std::ostream& err);

int cmd_sim(const std::string& in, const SimFlags& flags,
            const std::optional<std::string>& trace_csv,
            const std::optional<std::string>& report, std::ostream& out,
            std::ostream& err);

int cmd_compare(const std::vector<std::string>& inputs, const SimFlags& flags,
                const std::vector<Mode>& modes,
                const std::optional<std::string>& report, std::ostream& out,
                std::ostream& err);

/// Entry point behind the `greener` executable.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace greener::cli
