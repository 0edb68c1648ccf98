#pragma once

// Parameter sweeps over a Cartesian grid of config overrides.
//
// An axis is written `path=v1,v2,...`. Paths address the JSON config, either
// dotted (`thrusters.v1.magnitude_n`) or as a JSON pointer
// (`/thrusters/v1/magnitude_n`); `a|b=...` sets several paths to the same
// value. Values are JSON literals, so arrays and strings work too.

#include "aerobat/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aerobat::sweep {

struct GridAxis {
  std::vector<std::string> pointers;  // JSON pointers
  std::vector<std::string> values;    // JSON literals

  bool operator==(const GridAxis&) const = default;
};

/// Throws std::invalid_argument on malformed specs.
GridAxis parse_axis(const std::string& spec);

struct SweepOptions {
  unsigned workers = 0;              // 0: hardware concurrency
  double metrics_window = 2.0;       // trailing window, s
  double settle_band = deg2rad(5.0); // rad
  double settle_dwell = 1.0;         // s
};

struct SweepRow {
  std::size_t index = 0;
  std::vector<std::string> values;  // one per axis
  bool failed = false;
  std::string failure;
  double end_time = 0.0;
  std::optional<double> settling_time;
  sim::SignalMetrics roll, pitch;   // NaN when the run is shorter than the window
  double max_constraint_residual = 0.0;
};

struct SweepResult {
  std::vector<GridAxis> axes;
  SweepOptions options;
  std::vector<SweepRow> rows;  // grid order, last axis fastest
};

/// Grid points in Cartesian order. Throws ConfigError if an override produces
/// an unparsable config; invalid values are reported per row by run_sweep.
std::size_t grid_size(const std::vector<GridAxis>& axes);
std::vector<std::string> grid_values(const std::vector<GridAxis>& axes, std::size_t index);

/// Config for one grid point, run through parse_config.
config::RunConfig apply_point(const config::RunConfig& base, const std::vector<GridAxis>& axes,
                              std::size_t index);

/// Runs every grid point. Output is independent of the worker count.
SweepResult run_sweep(const config::RunConfig& base, const std::vector<GridAxis>& axes,
                      const SweepOptions& options = {});

void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

}  // namespace aerobat::sweep
