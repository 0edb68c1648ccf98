#include "aerobat/sweep.hpp"

#include "aerobat/errors.hpp"
#include "aerobat/io.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace aerobat::sweep {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::string to_pointer(const std::string& path) {
  if (path.empty()) throw std::invalid_argument("sweep axis: empty path");
  if (path.front() == '/') return path;
  std::string out;
  for (char c : path) out += c == '.' ? '/' : c;
  return "/" + out;
}

// Splits on commas outside brackets, braces and strings.
std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\' && i + 1 < s.size()) {
        cur += c;
        cur += s[++i];
        continue;
      }
      if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      --depth;
    } else if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
      continue;
    }
    cur += c;
  }
  out.push_back(trim(cur));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string axis_label(const GridAxis& axis) {
  std::string out;
  for (std::size_t i = 0; i < axis.pointers.size(); ++i) out += (i ? "|" : "") + axis.pointers[i];
  return out;
}

sim::SignalMetrics nan_metrics() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan, 0, nan, nan};
}

SweepRow run_point(const config::RunConfig& base, const std::vector<GridAxis>& axes,
                   std::size_t index, const SweepOptions& opt) {
  SweepRow row;
  row.index = index;
  row.values = grid_values(axes, index);
  row.roll = row.pitch = nan_metrics();
  try {
    const config::RunConfig cfg = apply_point(base, axes, index);
    const sim::Trajectory traj = sim::simulate(cfg.scenario);
    row.failed = traj.failed;
    row.failure = traj.failure;
    row.end_time = traj.end_time();
    row.max_constraint_residual = traj.max_constraint_residual;
    row.settling_time = sim::settling_time(traj, cfg.scenario.controller.reference,
                                           opt.settle_band, opt.settle_dwell);
    if (!traj.failed && traj.end_time() - traj.start_time() >= opt.metrics_window - 1e-9) {
      row.roll = sim::limit_cycle_metrics(traj, sim::Signal::Roll, opt.metrics_window);
      row.pitch = sim::limit_cycle_metrics(traj, sim::Signal::Pitch, opt.metrics_window);
    }
  } catch (const std::exception& e) {
    row.failed = true;
    row.failure = e.what();
  }
  return row;
}

}  // namespace

GridAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("sweep axis '" + spec + "': expected path=v1,v2,...");
  GridAxis axis;
  const std::string paths = spec.substr(0, eq);
  std::size_t pos = 0;
  for (;;) {
    const auto bar = paths.find('|', pos);
    axis.pointers.push_back(to_pointer(trim(paths.substr(pos, bar - pos))));
    if (bar == std::string::npos) break;
    pos = bar + 1;
  }
  axis.values = split_values(spec.substr(eq + 1));
  for (const std::string& v : axis.values) {
    if (v.empty()) throw std::invalid_argument("sweep axis '" + spec + "': empty value");
    if (!nlohmann::json::accept(v))
      throw std::invalid_argument("sweep axis '" + spec + "': '" + v + "' is not a JSON value");
  }
  return axis;
}

std::size_t grid_size(const std::vector<GridAxis>& axes) {
  std::size_t n = 1;
  for (const GridAxis& a : axes) n *= a.values.size();
  return n;
}

std::vector<std::string> grid_values(const std::vector<GridAxis>& axes, std::size_t index) {
  std::vector<std::string> out(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    const std::size_t n = axes[k].values.size();
    out[k] = axes[k].values[index % n];
    index /= n;
  }
  return out;
}

config::RunConfig apply_point(const config::RunConfig& base, const std::vector<GridAxis>& axes,
                              std::size_t index) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(config::to_json(base));
  const auto values = grid_values(axes, index);
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const auto value = nlohmann::ordered_json::parse(values[k]);
    for (const std::string& p : axes[k].pointers) {
      const nlohmann::ordered_json::json_pointer ptr(p);
      if (!j.contains(ptr)) throw ConfigError("sweep: no config entry at '" + p + "'");
      j[ptr] = value;
    }
  }
  return config::parse_config(j.dump(), "sweep point " + std::to_string(index));
}

SweepResult run_sweep(const config::RunConfig& base, const std::vector<GridAxis>& axes,
                      const SweepOptions& options) {
  for (const GridAxis& a : axes)
    if (a.values.empty() || a.pointers.empty())
      throw std::invalid_argument("sweep: empty grid axis");
  SweepResult result;
  result.axes = axes;
  result.options = options;
  const std::size_t n = grid_size(axes);
  result.rows.resize(n);

  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) result.rows[i] = run_point(base, axes, i, options);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  using io::format_double;
  out << "index";
  for (const GridAxis& a : result.axes) out << ',' << csv_field(axis_label(a));
  out << ",failed,failure,end_time_s,settled,settling_time_s,settle_band_deg,settle_dwell_s,"
         "window_s,roll_mean_deg,roll_p2p_deg,pitch_mean_deg,pitch_p2p_deg,pitch_period_s,"
         "max_constraint_residual\n";
  const SweepOptions& o = result.options;
  for (const SweepRow& r : result.rows) {
    out << r.index;
    for (const std::string& v : r.values) out << ',' << csv_field(v);
    out << ',' << (r.failed ? 1 : 0) << ',' << csv_field(r.failure) << ','
        << format_double(r.end_time) << ',' << (r.settling_time ? 1 : 0) << ','
        << (r.settling_time ? format_double(*r.settling_time) : "") << ','
        << format_double(rad2deg(o.settle_band)) << ',' << format_double(o.settle_dwell) << ','
        << format_double(o.metrics_window) << ',' << format_double(rad2deg(r.roll.mean)) << ','
        << format_double(rad2deg(r.roll.peak_to_peak)) << ','
        << format_double(rad2deg(r.pitch.mean)) << ','
        << format_double(rad2deg(r.pitch.peak_to_peak)) << ',' << format_double(r.pitch.period)
        << ',' << format_double(r.max_constraint_residual) << '\n';
  }
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out = io::open_output(path);
  write_sweep_csv(result, out);
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace aerobat::sweep
