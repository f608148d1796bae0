#include "greener/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "greener/annotator.hpp"
#include "greener/config.hpp"
#include "greener/report.hpp"

namespace greener::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content,
                  std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << content;
  f.close();
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
}

Program load_program(const std::string& path) {
  try {
    return parse_program(read_file(path));
  } catch (const GasmError& e) {
    throw std::runtime_error(path + ":" + e.what());
  }
}

}  // namespace

SimConfig resolve_config(const SimFlags& flags, std::optional<Mode> mode) {
  SimConfig c;
  bool runtime_opt_set = false;
  if (flags.config_path) {
    std::ifstream in(*flags.config_path);
    if (!in) throw ConfigError("cannot open config '" + *flags.config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config '" + *flags.config_path + "': " + e.what());
    }
    c = apply_config_json(j, c);
    runtime_opt_set = j.is_object() && j.contains("runtime_opt");
  }
  if (mode)
    c.mode = *mode;
  else if (flags.mode)
    c.mode = *flags.mode;
  if (flags.runtime_opt)
    c.runtime_opt = *flags.runtime_opt;
  else if (!runtime_opt_set)
    c.runtime_opt = c.mode == Mode::greener;
  if (flags.scheduler) c.scheduler = *flags.scheduler;
  if (flags.warps) c.warps = *flags.warps;
  if (flags.regs_per_thread) c.registers_per_thread = *flags.regs_per_thread;
  if (flags.wake_sleep) c.wake_sleep_cycles = *flags.wake_sleep;
  if (flags.wake_off) c.wake_off_cycles = *flags.wake_off;
  if (flags.seed) c.seed = *flags.seed;
  c.validate();
  return c;
}

int cmd_analyze(const std::string& in, Threshold w, const std::string& out_path,
                const std::optional<std::string>& facts_csv,
                const std::optional<std::string>& dot, std::ostream& out,
                std::ostream& err) {
  try {
    if (w < 1) throw std::invalid_argument("threshold must be >= 1");
    Program p = strip_power(load_program(in));
    AnalysisResult a = analyze(p, w);
    std::string annotated = serialize_program(annotate(p, a), true);
    std::string facts, graph;
    if (facts_csv) {
      std::ostringstream os;
      write_facts_csv(os, a);
      facts = os.str();
    }
    if (dot) {
      std::ostringstream os;
      write_dot(os, p, a.cfg());
      graph = os.str();
    }
    write_output(out_path, annotated, out);
    if (facts_csv) write_output(*facts_csv, facts, out);
    if (dot) write_output(*dot, graph, out);
    return 0;
  } catch (const std::exception& e) {
    err << "greener analyze: " << e.what() << '\n';
    return 1;
  }
}

int cmd_sim(const std::string& in, const SimFlags& flags,
            const std::optional<std::string>& trace_csv,
            const std::optional<std::string>& report, std::ostream& out,
            std::ostream& err) {
  try {
    SimConfig c = resolve_config(flags);
    if (trace_csv) c.trace = true;
    Program p = load_program(in);
    SimResult r = simulate(p, c);
    std::string trace;
    if (trace_csv) {
      std::ostringstream os;
      write_trace_csv(os, r);
      trace = os.str();
    }
    write_output(report.value_or("-"), run_report(r).dump(2) + "\n", out);
    if (trace_csv) write_output(*trace_csv, trace, out);
    return 0;
  } catch (const std::exception& e) {
    err << "greener sim: " << e.what() << '\n';
    return 1;
  }
}

int cmd_compare(const std::vector<std::string>& inputs, const SimFlags& flags,
                const std::vector<Mode>& modes,
                const std::optional<std::string>& report, std::ostream& out,
                std::ostream& err) {
  try {
    if (modes.size() < 2) throw std::invalid_argument("compare needs at least two modes");
    if (inputs.size() != 1 && inputs.size() != modes.size())
      throw std::invalid_argument("give one input, or one input per mode");
    std::map<Mode, SimResult> results;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (results.contains(modes[k]))
        throw std::invalid_argument("mode '" + std::string(to_string(modes[k])) +
                                    "' given twice");
      SimConfig c = resolve_config(flags, modes[k]);
      Program p = load_program(inputs.size() == 1 ? inputs[0] : inputs[k]);
      results.emplace(modes[k], simulate(p, c));
    }
    write_output(report.value_or("-"), compare_report(results).dump(2) + "\n", out);
    return 0;
  } catch (const std::exception& e) {
    err << "greener compare: " << e.what() << '\n';
    return 1;
  }
}

namespace {

void add_sim_flags(CLI::App& app, SimFlags& f, std::string& runtime_opt,
                   std::string& scheduler) {
  app.add_option("--config", f.config_path, "JSON file with SimConfig fields");
  app.add_option("--runtime-opt", runtime_opt,
                 "Lookup-table state correction (on/off; default on for greener)")
      ->check(CLI::IsMember({"on", "off", "true", "false", "1", "0"}));
  app.add_option("--scheduler", scheduler, "Warp scheduler")
      ->check(CLI::IsMember({"lrr", "gto"}));
  app.add_option("--warps", f.warps, "Resident warps (default 8)");
  app.add_option("--regs-per-thread", f.regs_per_thread,
                 "Registers per thread (default 16)");
  app.add_option("--wake-sleep", f.wake_sleep, "SLEEP->ON latency in cycles (default 1)");
  app.add_option("--wake-off", f.wake_off, "OFF->ON latency in cycles (default 2)");
  app.add_option("--seed", f.seed, "Branch outcome seed");
}

void finish_sim_flags(SimFlags& f, const std::string& runtime_opt,
                      const std::string& scheduler) {
  if (!runtime_opt.empty())
    f.runtime_opt = runtime_opt == "on" || runtime_opt == "true" || runtime_opt == "1";
  if (!scheduler.empty()) f.scheduler = parse_scheduler(scheduler);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Register power-state analysis and warp pipeline simulator", "greener"};
  app.require_subcommand(1);

  std::string in, out_path = "-";
  std::optional<std::string> facts, dot, trace, report;
  Threshold w = kDefaultThreshold;
  auto* analyze_cmd = app.add_subcommand("analyze", "Annotate GASM with power states");
  analyze_cmd->add_option("input", in, "Input .gasm")->required();
  analyze_cmd->add_option("-W,--threshold", w, "Distance threshold (default 3)")
      ->check(CLI::Range(1u, 1000000u));
  analyze_cmd->add_option("-o,--output", out_path, "Annotated output (default stdout)");
  analyze_cmd->add_option("--dump-facts", facts, "Write per-point facts CSV");
  analyze_cmd->add_option("--dot", dot, "Write the CFG in DOT format");

  SimFlags sim_flags;
  std::string sim_mode, sim_rt, sim_sched;
  auto* sim_cmd = app.add_subcommand("sim", "Simulate one mode and report energy");
  sim_cmd->add_option("input", in, "Input .gasm")->required();
  sim_cmd->add_option("--mode", sim_mode, "baseline (default), sleepreg or greener")
      ->check(CLI::IsMember({"baseline", "sleepreg", "greener"}));
  sim_cmd->add_option("--trace", trace, "Write the event trace CSV");
  sim_cmd->add_option("--report", report, "Report JSON (default stdout)");
  add_sim_flags(*sim_cmd, sim_flags, sim_rt, sim_sched);

  SimFlags cmp_flags;
  std::vector<std::string> inputs;
  std::vector<std::string> mode_names = {"baseline", "sleepreg", "greener"};
  std::string cmp_rt, cmp_sched;
  auto* cmp_cmd = app.add_subcommand("compare", "Simulate several modes and compare");
  cmp_cmd->add_option("inputs", inputs, "One input for all modes, or one per mode")
      ->required();
  cmp_cmd->add_option("--modes", mode_names, "Modes to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"baseline", "sleepreg", "greener"}));
  cmp_cmd->add_option("--report", report, "Report JSON (default stdout)");
  add_sim_flags(*cmp_cmd, cmp_flags, cmp_rt, cmp_sched);

  std::vector<std::string> argv_store{"greener"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (*analyze_cmd) return cmd_analyze(in, w, out_path, facts, dot, out, err);
  if (*sim_cmd) {
    if (!sim_mode.empty()) sim_flags.mode = parse_mode(sim_mode);
    finish_sim_flags(sim_flags, sim_rt, sim_sched);
    return cmd_sim(in, sim_flags, trace, report, out, err);
  }
  finish_sim_flags(cmp_flags, cmp_rt, cmp_sched);
  std::vector<Mode> modes;
  for (const auto& m : mode_names) modes.push_back(*parse_mode(m));
  return cmd_compare(inputs, cmp_flags, modes, report, out, err);
}

}  // namespace greener::cli
