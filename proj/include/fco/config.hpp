#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fco/detection.hpp"
#include "fco/scenario.hpp"

namespace fco {

/// Everything a config file can set: the scenario plus the sensor rig.
struct BenchConfig {
  ScenarioConfig scenario;
  SensorConfig sensors;

  bool operator==(const BenchConfig&) const = default;
};

/// Flat `key = value` text, `#` comments. Signal phases are `signal.N = seconds;ARMS`
/// with ARMS a comma list of E,N,W,S (may be empty); buildings are
/// `building.N = x1,y1;x2,y2;...`. Unknown keys and bad values throw ConfigError.
BenchConfig parse_config(std::string_view text);
BenchConfig load_config(const std::filesystem::path& path);

/// Serializes every field so that parse_config(to_config_text(c)) == c.
std::string to_config_text(const BenchConfig& config);

}  // namespace fco
