#include "aerobat/io.hpp"

#include "aerobat/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace aerobat::io {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(std::string_view(line).substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

double deg(double rad) { return rad2deg(rad); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory CSV
// ---------------------------------------------------------------------------

const std::array<std::string, kTrajectoryColumns>& trajectory_header() {
  static const std::array<std::string, kTrajectoryColumns> header{
      "t",           "px",          "py",           "pz",
      "roll_deg",    "pitch_deg",   "yaw_deg",      "shoulder_deg",
      "elbow_deg",   "vx",          "vy",           "vz",
      "roll_rate_dps", "pitch_rate_dps", "yaw_rate_dps", "shoulder_rate_dps",
      "elbow_rate_dps", "v1",       "v2",           "v3",
      "v4",          "lambda_shoulder", "lambda_elbow", "total_lift_n"};
  return header;
}

TrajectoryRow trajectory_row(const sim::Snapshot& s) {
  const Vec8& q = s.state.coords.q;
  const Vec8& qd = s.state.coords.qdot;
  TrajectoryRow r{};
  std::size_t k = 0;
  r[k++] = s.state.t;
  for (int i = coord::kPx; i <= coord::kPz; ++i) r[k++] = q[i];
  for (int i = coord::kRoll; i <= coord::kElbow; ++i) r[k++] = deg(q[i]);
  for (int i = coord::kPx; i <= coord::kPz; ++i) r[k++] = qd[i];
  for (int i = coord::kRoll; i <= coord::kElbow; ++i) r[k++] = deg(qd[i]);
  for (bool on : s.command.on) r[k++] = on ? 1.0 : 0.0;
  r[k++] = s.lambda[0];
  r[k++] = s.lambda[1];
  r[k++] = s.total_lift;
  return r;
}

void write_trajectory_csv(const sim::Trajectory& traj, std::ostream& out) {
  if (traj.snapshots.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  const auto& header = trajectory_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const sim::Snapshot& s : traj.snapshots) {
    const TrajectoryRow r = trajectory_row(s);
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
}

void write_trajectory_csv(const sim::Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  write_trajectory_csv(traj, out);
  finish_output(out, path);
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty trajectory file");
  const auto cols = split_csv(line);
  const auto& header = trajectory_header();
  if (!std::equal(cols.begin(), cols.end(), header.begin(), header.end()))
    throw IoError(path.string() + ":1: unexpected trajectory header");

  std::vector<TrajectoryRow> rows;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != kTrajectoryColumns)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(kTrajectoryColumns) + " columns, got " +
                    std::to_string(fields.size()));
    TrajectoryRow r{};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], r[i]))
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad value '" + fields[i] +
                      "' in column " + header[i]);
    }
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Stick diagram
// ---------------------------------------------------------------------------

std::vector<StickFrame> stick_frames(const sim::Trajectory& traj, const MorphologyConfig& morph,
                                     int stride) {
  if (stride < 1) throw std::invalid_argument("stick diagram stride must be >= 1");
  std::vector<StickFrame> frames;
  for (std::size_t i = 0; i < traj.snapshots.size(); i += static_cast<std::size_t>(stride)) {
    const sim::Snapshot& s = traj.snapshots[i];
    const ChainKinematics chain = compute_chain(s.state.coords, morph);
    StickFrame f;
    f.t = s.state.t;
    f.wings[0] = wing_chain_points(chain, Side::Left, morph);
    f.wings[1] = wing_chain_points(chain, Side::Right, morph);
    frames.push_back(f);
  }
  return frames;
}

namespace {

struct Bounds {
  double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
  double lo_v = lo_u, hi_v = -lo_u;

  void add(double u, double v) {
    lo_u = std::min(lo_u, u);
    hi_u = std::max(hi_u, u);
    lo_v = std::min(lo_v, v);
    hi_v = std::max(hi_v, v);
  }
};

// One projection panel; `vert` picks the inertial axis drawn upwards.
void svg_panel(std::ostream& out, const std::vector<StickFrame>& frames, int vert, double x0,
               double width, double height, const std::string& title) {
  Bounds b;
  for (const StickFrame& f : frames)
    for (const auto& wing : f.wings)
      for (const Vec3& p : wing) b.add(p.x(), p[vert]);
  const double margin = 20.0;
  const double su = b.hi_u > b.lo_u ? b.hi_u - b.lo_u : 1.0;
  const double sv = b.hi_v > b.lo_v ? b.hi_v - b.lo_v : 1.0;
  const double scale = std::min((width - 2 * margin) / su, (height - 2 * margin - 20) / sv);
  auto px = [&](double u) { return x0 + margin + (u - b.lo_u) * scale; };
  auto py = [&](double v) { return height - margin - (v - b.lo_v) * scale; };

  out << "  <g>\n    <text x=\"" << x0 + margin << "\" y=\"16\" font-family=\"sans-serif\" "
      << "font-size=\"13\">" << title << "</text>\n";
  const char* colors[2] = {"#1f77b4", "#d62728"};
  for (const StickFrame& f : frames) {
    for (std::size_t side = 0; side < 2; ++side) {
      out << "    <polyline fill=\"none\" stroke=\"" << colors[side]
          << "\" stroke-opacity=\"0.5\" stroke-width=\"1\" points=\"";
      for (std::size_t k = 0; k < f.wings[side].size(); ++k) {
        const Vec3& p = f.wings[side][k];
        out << (k ? " " : "") << std::fixed << std::setprecision(2) << px(p.x()) << ","
            << py(p[vert]);
      }
      out << "\"/>\n";
    }
    const Vec3& com = f.wings[0][0];
    out << "    <circle cx=\"" << px(com.x()) << "\" cy=\"" << py(com[vert])
        << "\" r=\"1.5\" fill=\"black\"/>\n";
  }
  out << "  </g>\n";
  out.unsetf(std::ios::floatfield);
}

}  // namespace

void write_stick_svg(const std::vector<StickFrame>& frames, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  const double w = 600.0, h = 400.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << 2 * w << " " << h << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg_panel(out, frames, 2, 0.0, w, h, "side view (x-z)");
  svg_panel(out, frames, 1, w, w, h, "top view (x-y)");
  out << "</svg>\n";
  finish_output(out, path);
}

void write_stick_csv(const std::vector<StickFrame>& frames, const std::filesystem::path& path) {
  static const char* points[4] = {"com", "shoulder", "elbow", "tip"};
  std::ofstream out = open_output(path);
  out << "frame,t,side,point,x,y,z\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t side = 0; side < 2; ++side) {
      for (std::size_t k = 0; k < 4; ++k) {
        const Vec3& p = frames[i].wings[side][k];
        out << i << ',' << format_double(frames[i].t) << ',' << (side == 0 ? "left" : "right")
            << ',' << points[k] << ',' << format_double(p.x()) << ',' << format_double(p.y())
            << ',' << format_double(p.z()) << '\n';
      }
    }
  }
  finish_output(out, path);
}

void write_stick_diagram(const sim::Trajectory& traj, const MorphologyConfig& morph, int stride,
                         const std::filesystem::path& svg, const std::filesystem::path& csv) {
  const auto frames = stick_frames(traj, morph, stride);
  write_stick_svg(frames, svg);
  write_stick_csv(frames, csv);
}

// ---------------------------------------------------------------------------
// IMU logs
// ---------------------------------------------------------------------------

ImuLog parse_imu_log(std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    if (cols != std::vector<std::string>{"t", "roll", "pitch", "yaw"})
      throw IoError(source + ":" + std::to_string(lineno) +
                    ": expected header 't,roll,pitch,yaw', got '" + trim(line) + "'");
    have_header = true;
  }
  if (!have_header) throw IoError(source + ": empty IMU log");

  ImuLog log;
  int row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++row;
    const std::string where = source + ": row " + std::to_string(row) + " (line " +
                              std::to_string(lineno) + ")";
    const auto fields = split_csv(line);
    if (fields.size() != 4)
      throw IoError(where + ": expected 4 fields, got " + std::to_string(fields.size()));
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!parse_double(fields[i], v[i]) || !std::isfinite(v[i]))
        throw IoError(where + ": bad value '" + fields[i] + "'");
    }
    if (!log.empty() && !(v[0] > log.back().t))
      throw IoError(where + ": time " + fields[0] + " is not after the previous row");
    log.push_back({v[0], deg2rad(v[1]), deg2rad(v[2]), deg2rad(v[3])});
  }
  if (log.empty()) throw IoError(source + ": IMU log has no data rows");
  return log;
}

ImuLog ingest_imu_log(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_imu_log(in, path.string());
}

void write_imu_log(const ImuLog& log, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "t,roll,pitch,yaw\n";
  for (const ImuSample& s : log)
    out << format_double(s.t) << ',' << format_double(deg(s.roll)) << ','
        << format_double(deg(s.pitch)) << ',' << format_double(deg(s.yaw)) << '\n';
  finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

const std::vector<double>& AttitudeSeries::values(sim::Signal sig) const {
  switch (sig) {
    case sim::Signal::Roll: return roll;
    case sim::Signal::Pitch: return pitch;
    case sim::Signal::Yaw: return yaw;
    default: break;
  }
  throw std::invalid_argument("attitude series has no signal '" + sim::to_string(sig) + "'");
}

AttitudeSeries attitude_series(const sim::Trajectory& traj, std::string label) {
  AttitudeSeries s;
  s.label = std::move(label);
  for (const sim::Snapshot& snap : traj.snapshots) {
    s.t.push_back(snap.state.t);
    s.roll.push_back(snap.state.coords.q[coord::kRoll]);
    s.pitch.push_back(snap.state.coords.q[coord::kPitch]);
    s.yaw.push_back(snap.state.coords.q[coord::kYaw]);
  }
  return s;
}

AttitudeSeries attitude_series(const std::vector<TrajectoryRow>& rows, std::string label) {
  AttitudeSeries s;
  s.label = std::move(label);
  for (const TrajectoryRow& r : rows) {
    s.t.push_back(r[0]);
    s.roll.push_back(deg2rad(r[4]));
    s.pitch.push_back(deg2rad(r[5]));
    s.yaw.push_back(deg2rad(r[6]));
  }
  return s;
}

AttitudeSeries attitude_series(const ImuLog& log, std::string label) {
  AttitudeSeries s;
  s.label = std::move(label);
  for (const ImuSample& x : log) {
    s.t.push_back(x.t);
    s.roll.push_back(x.roll);
    s.pitch.push_back(x.pitch);
    s.yaw.push_back(x.yaw);
  }
  return s;
}

const SignalComparison& ComparisonReport::at(sim::Signal sig) const {
  for (const SignalComparison& c : signals)
    if (c.signal == sig) return c;
  throw std::invalid_argument("comparison report has no signal '" + sim::to_string(sig) + "'");
}

ComparisonReport compare(const AttitudeSeries& sim, const AttitudeSeries& exp, double start,
                         double end) {
  if (!(end > start)) throw std::invalid_argument("comparison window must have end > start");
  auto metrics = [&](const AttitudeSeries& s, sim::Signal sig) {
    try {
      return sim::signal_metrics(s.t, s.values(sig), start, end);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(s.label + ": " + e.what());
    }
  };
  ComparisonReport r;
  r.start = start;
  r.end = end;
  for (sim::Signal sig : {sim::Signal::Roll, sim::Signal::Pitch, sim::Signal::Yaw})
    r.signals.push_back({sig, metrics(sim, sig), metrics(exp, sig)});
  return r;
}

void write_comparison_text(const ComparisonReport& report, std::ostream& out) {
  out << "comparison window [" << report.start << ", " << report.end << "] s\n";
  out << "mean over whole cycles, peak-to-peak over the window; deltas are sim - exp\n\n";
  out << std::left << std::setw(8) << "signal" << std::right;
  for (const char* h : {"sim mean", "exp mean", "d mean", "sim p2p", "exp p2p", "d p2p"})
    out << std::setw(11) << h;
  out << "   (deg)\n";
  out << std::fixed << std::setprecision(3);
  for (const SignalComparison& c : report.signals) {
    out << std::left << std::setw(8) << sim::to_string(c.signal) << std::right;
    for (double v : {c.sim.mean, c.exp.mean, c.mean_delta(), c.sim.peak_to_peak,
                     c.exp.peak_to_peak, c.p2p_delta()})
      out << std::setw(11) << deg(v);
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "signal,window_start_s,window_end_s,sim_mean_deg,exp_mean_deg,mean_delta_deg,"
         "abs_mean_delta_deg,sim_p2p_deg,exp_p2p_deg,p2p_delta_deg,abs_p2p_delta_deg,"
         "sim_period_s,exp_period_s\n";
  for (const SignalComparison& c : report.signals) {
    out << sim::to_string(c.signal);
    for (double v : {report.start, report.end, deg(c.sim.mean), deg(c.exp.mean),
                     deg(c.mean_delta()), std::abs(deg(c.mean_delta())), deg(c.sim.peak_to_peak),
                     deg(c.exp.peak_to_peak), deg(c.p2p_delta()), std::abs(deg(c.p2p_delta())),
                     c.sim.period, c.exp.period})
      out << ',' << format_double(v);
    out << '\n';
  }
  finish_output(out, path);
}

// ---------------------------------------------------------------------------
// Gait preview
// ---------------------------------------------------------------------------

void write_gait_cycle_csv(const KSGaitConfig& gait, int samples, const std::filesystem::path& path) {
  if (samples < 2) throw std::invalid_argument("gait preview needs at least 2 samples");
  gait.validate();
  std::ofstream out = open_output(path);
  out << "t,shoulder_deg,elbow_deg,shoulder_rate_dps,elbow_rate_dps,shoulder_accel_dps2,"
         "elbow_accel_dps2\n";
  const double period = 1.0 / gait.flap_frequency;
  for (int i = 0; i < samples; ++i) {
    const double t = period * i / (samples - 1);
    const GaitSample g = ks_gait(t, gait);
    out << format_double(t);
    for (double v : {g.q_s, g.q_e, g.dq_s, g.dq_e, g.ddq_s, g.ddq_e}) out << ',' << format_double(deg(v));
    out << '\n';
  }
  finish_output(out, path);
}

}  // namespace aerobat::io
