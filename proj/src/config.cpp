#include "greener/config.hpp"

#include <fstream>
#include <set>

namespace greener {

namespace {

template <typename T>
T get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& known,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw ConfigError("unknown config key '" + where + k + "'");
}

std::map<std::string, std::uint32_t> uint_map(const nlohmann::json& j,
                                              const std::string& key) {
  if (!j.is_object()) throw ConfigError("config key '" + key + "' must be an object");
  std::map<std::string, std::uint32_t> out;
  for (const auto& [k, v] : j.items()) out[k] = get<std::uint32_t>(v, key + "." + k);
  return out;
}

}  // namespace

SimConfig apply_config_json(const nlohmann::json& j, SimConfig c) {
  check_keys(j,
             {"warps", "registers_per_thread", "register_file_size", "mode",
              "runtime_opt", "scheduler", "wake_sleep_cycles", "wake_off_cycles",
              "clock_hz", "opcode_latency", "mem_latency", "power", "seed",
              "branch_taken_prob", "loop_trips", "max_cycles", "trace"},
             "");
  for (const auto& [k, v] : j.items()) {
    if (k == "warps") c.warps = get<std::uint32_t>(v, k);
    else if (k == "registers_per_thread") c.registers_per_thread = get<std::uint32_t>(v, k);
    else if (k == "register_file_size") c.register_file_size = get<std::uint64_t>(v, k);
    else if (k == "mode") {
      auto m = parse_mode(get<std::string>(v, k));
      if (!m) throw ConfigError("unknown mode '" + v.get<std::string>() + "'");
      c.mode = *m;
    } else if (k == "runtime_opt") c.runtime_opt = get<bool>(v, k);
    else if (k == "scheduler") {
      auto s = parse_scheduler(get<std::string>(v, k));
      if (!s) throw ConfigError("unknown scheduler '" + v.get<std::string>() + "'");
      c.scheduler = *s;
    } else if (k == "wake_sleep_cycles") c.wake_sleep_cycles = get<std::uint32_t>(v, k);
    else if (k == "wake_off_cycles") c.wake_off_cycles = get<std::uint32_t>(v, k);
    else if (k == "clock_hz") c.power.clock_hz = get<double>(v, k);
    else if (k == "opcode_latency") c.opcode_latency = uint_map(v, k);
    else if (k == "mem_latency") c.mem_latency = get<std::uint32_t>(v, k);
    else if (k == "seed") c.seed = get<std::uint64_t>(v, k);
    else if (k == "branch_taken_prob") c.branch_taken_prob = get<double>(v, k);
    else if (k == "loop_trips") c.loop_trips = uint_map(v, k);
    else if (k == "max_cycles") c.max_cycles = get<std::uint64_t>(v, k);
    else if (k == "trace") c.trace = get<bool>(v, k);
    else if (k == "power") {
      check_keys(v,
                 {"p_on", "p_sleep", "p_off", "e_sleep_transition",
                  "e_off_transition", "clock_hz"},
                 "power.");
      for (const auto& [pk, pv] : v.items()) {
        double x = get<double>(pv, "power." + pk);
        if (pk == "p_on") c.power.p_on = x;
        else if (pk == "p_sleep") c.power.p_sleep = x;
        else if (pk == "p_off") c.power.p_off = x;
        else if (pk == "e_sleep_transition") c.power.e_sleep_transition = x;
        else if (pk == "e_off_transition") c.power.e_off_transition = x;
        else c.power.clock_hz = x;
      }
    }
  }
  return c;
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return apply_config_json(j, std::move(base));
}

nlohmann::json to_json(const SimConfig& c) {
  return {
      {"warps", c.warps},
      {"registers_per_thread", c.registers_per_thread},
      {"register_file_size", c.register_file_size},
      {"mode", std::string(to_string(c.mode))},
      {"runtime_opt", c.runtime_opt},
      {"scheduler", std::string(to_string(c.scheduler))},
      {"wake_sleep_cycles", c.wake_sleep_cycles},
      {"wake_off_cycles", c.wake_off_cycles},
      {"opcode_latency", c.opcode_latency},
      {"mem_latency", c.mem_latency},
      {"power",
       {{"p_on", c.power.p_on},
        {"p_sleep", c.power.p_sleep},
        {"p_off", c.power.p_off},
        {"e_sleep_transition", c.power.e_sleep_transition},
        {"e_off_transition", c.power.e_off_transition},
        {"clock_hz", c.power.clock_hz}}},
      {"seed", c.seed},
      {"branch_taken_prob", c.branch_taken_prob},
      {"loop_trips", c.loop_trips},
      {"max_cycles", c.max_cycles},
      {"trace", c.trace},
  };
}

}  // namespace greener
