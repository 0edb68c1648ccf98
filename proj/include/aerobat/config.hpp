#pragma once

// JSON run configuration. Angles are degrees in the file and radians in
// memory; keys carry their unit as a suffix. Missing keys keep their defaults,
// unknown keys are rejected.

#include "aerobat/sim.hpp"

#include <filesystem>
#include <string>

namespace aerobat::config {

inline constexpr int kSchemaVersion = 1;

struct OutputSettings {
  std::string directory = "out";
  std::string trajectory_csv = "trajectory.csv";
  std::string stick_svg = "stick.svg";
  std::string stick_csv = "stick.csv";
  int stick_stride = 20;  // steps between stick-diagram frames

  bool operator==(const OutputSettings&) const = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  sim::ScenarioConfig scenario = sim::paper_scenario();
  OutputSettings output;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. `source` names the input in error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Throws IoError if the file cannot be read, ConfigError otherwise.
RunConfig load_config(const std::filesystem::path& path);

/// Full tree, every field written.
std::string to_json(const RunConfig& cfg);

void save_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace aerobat::config
