#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "greener/simcore.hpp"

namespace greener {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Overlays a JSON object whose keys mirror SimConfig field names onto
/// `base`. `clock_hz` may appear at top level or inside `power`. Unknown
/// keys and wrongly typed values are errors.
SimConfig apply_config_json(const nlohmann::json& j, SimConfig base = {});

SimConfig load_config_file(const std::string& path, SimConfig base = {});

nlohmann::json to_json(const SimConfig& c);

}  // namespace greener
