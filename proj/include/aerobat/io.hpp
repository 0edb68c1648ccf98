#pragma once

// File formats: trajectory CSV, stick diagrams, IMU logs and the
// simulation/experiment comparison report. Angles are degrees on disk.

#include "aerobat/sim.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace aerobat::io {

// ---------------------------------------------------------------------------
// Trajectory CSV
// ---------------------------------------------------------------------------

inline constexpr std::size_t kTrajectoryColumns = 24;

/// t, px, py, pz, roll_deg, pitch_deg, yaw_deg, shoulder_deg, elbow_deg,
/// vx, vy, vz, roll_rate_dps, pitch_rate_dps, yaw_rate_dps, shoulder_rate_dps,
/// elbow_rate_dps, v1, v2, v3, v4, lambda_shoulder, lambda_elbow, total_lift_n
const std::array<std::string, kTrajectoryColumns>& trajectory_header();

using TrajectoryRow = std::array<double, kTrajectoryColumns>;

TrajectoryRow trajectory_row(const sim::Snapshot& s);

/// Shortest round-trip decimals. Throws std::invalid_argument on an empty trajectory.
void write_trajectory_csv(const sim::Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const sim::Trajectory& traj, const std::filesystem::path& path);

/// Rejects a header other than trajectory_header() and ragged rows.
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Stick diagram
// ---------------------------------------------------------------------------

struct StickFrame {
  double t = 0.0;
  std::array<std::array<Vec3, 4>, 2> wings;  // [side][CoM, shoulder, elbow, tip]
};

/// Every `stride`-th snapshot, starting with the first.
std::vector<StickFrame> stick_frames(const sim::Trajectory& traj, const MorphologyConfig& morph,
                                     int stride);

/// Side (x-z) and top (x-y) projections.
void write_stick_svg(const std::vector<StickFrame>& frames, const std::filesystem::path& path);
/// frame, t, side, point, x, y, z
void write_stick_csv(const std::vector<StickFrame>& frames, const std::filesystem::path& path);

void write_stick_diagram(const sim::Trajectory& traj, const MorphologyConfig& morph, int stride,
                         const std::filesystem::path& svg, const std::filesystem::path& csv);

// ---------------------------------------------------------------------------
// IMU logs and comparison
// ---------------------------------------------------------------------------

struct ImuSample {
  double t = 0.0;
  double roll = 0.0;  // rad
  double pitch = 0.0;
  double yaw = 0.0;
};

using ImuLog = std::vector<ImuSample>;

/// CSV with header t,roll,pitch,yaw (degrees). Errors name the 1-based data
/// row and the file line.
ImuLog parse_imu_log(std::istream& in, const std::string& source = "<stream>");
ImuLog ingest_imu_log(const std::filesystem::path& path);
void write_imu_log(const ImuLog& log, const std::filesystem::path& path);

/// Attitude time series, radians.
struct AttitudeSeries {
  std::string label;
  std::vector<double> t, roll, pitch, yaw;

  const std::vector<double>& values(sim::Signal sig) const;
};

AttitudeSeries attitude_series(const sim::Trajectory& traj, std::string label = "simulation");
AttitudeSeries attitude_series(const std::vector<TrajectoryRow>& rows,
                               std::string label = "simulation");
AttitudeSeries attitude_series(const ImuLog& log, std::string label = "experiment");

struct SignalComparison {
  sim::Signal signal = sim::Signal::Pitch;
  sim::SignalMetrics sim;
  sim::SignalMetrics exp;

  double mean_delta() const { return sim.mean - exp.mean; }
  double p2p_delta() const { return sim.peak_to_peak - exp.peak_to_peak; }
};

struct ComparisonReport {
  double start = 0.0;
  double end = 0.0;
  std::vector<SignalComparison> signals;  // roll, pitch, yaw

  const SignalComparison& at(sim::Signal sig) const;
};

/// Metrics of both sources over the same window [start, end]. Throws
/// std::invalid_argument naming the source that does not cover it.
ComparisonReport compare(const AttitudeSeries& sim, const AttitudeSeries& exp, double start,
                         double end);

void write_comparison_text(const ComparisonReport& report, std::ostream& out);
/// signal, sim_mean_deg, exp_mean_deg, mean_delta_deg, abs_mean_delta_deg,
/// sim_p2p_deg, exp_p2p_deg, p2p_delta_deg, abs_p2p_delta_deg, sim_period_s, exp_period_s
void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Gait preview
// ---------------------------------------------------------------------------

/// One flap cycle: t, shoulder_deg, elbow_deg, rates (deg/s), accelerations (deg/s^2).
void write_gait_cycle_csv(const KSGaitConfig& gait, int samples, const std::filesystem::path& path);

/// Opens for writing, creating parent directories. Throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

}  // namespace aerobat::io
