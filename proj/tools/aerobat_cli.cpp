// aerobat: command-line front end.
//
// Exit codes: 0 success, 1 usage or config error, 2 simulation divergence,
// 3 I/O error.

#include "aerobat/config.hpp"
#include "aerobat/dynamics.hpp"
#include "aerobat/errors.hpp"
#include "aerobat/io.hpp"
#include "aerobat/sim.hpp"
#include "aerobat/sweep.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace aerobat;

namespace {

enum Exit { kOk = 0, kUsage = 1, kDiverged = 2, kIo = 3 };

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<double> dt;
  std::optional<double> duration;
};

void add_common(CLI::App* app, CommonOptions& o, bool with_out = true) {
  app->add_option("--config", o.config, "Run configuration (JSON); defaults to the built-in scenario");
  if (with_out) app->add_option("--out", o.out, "Output directory (overrides output.directory)");
  app->add_option("--dt", o.dt, "Integration step, s");
  app->add_option("--duration", o.duration, "Simulated time, s");
}

config::RunConfig load(const CommonOptions& o) {
  config::RunConfig cfg = o.config.empty() ? config::RunConfig{} : config::load_config(o.config);
  if (o.dt) cfg.scenario.sim.dt = *o.dt;
  if (o.duration) cfg.scenario.sim.duration = *o.duration;
  if (!o.out.empty()) cfg.output.directory = o.out;
  cfg.validate();
  return cfg;
}

std::string deg_str(double rad, int precision = 2) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << rad2deg(rad);
  return ss.str();
}

void print_summary(std::ostream& out, const config::RunConfig& cfg, const sim::Trajectory& traj) {
  const auto& ref = cfg.scenario.controller.reference;
  out << "scenario        " << cfg.scenario.name << '\n';
  out << "steps           " << traj.snapshots.size() - 1 << " at dt = " << traj.dt << " s\n";
  out << "end time        " << traj.end_time() << " s\n";
  out << "status          " << (traj.failed ? "FAILED: " + traj.failure : std::string("ok")) << '\n';
  out << "references      roll " << deg_str(ref.roll) << " deg, pitch " << deg_str(ref.pitch)
      << " deg\n";
  const auto settle = sim::settling_time(traj, ref);
  out << "settling time   "
      << (settle ? std::to_string(*settle) + " s" : std::string("not settled"))
      << " (both errors within 5 deg for 1 s)\n";
  const double window = std::min(2.0, traj.end_time() - traj.start_time());
  if (window > 0.0) {
    for (sim::Signal sig : {sim::Signal::Roll, sim::Signal::Pitch, sim::Signal::Yaw}) {
      const auto m = sim::limit_cycle_metrics(traj, sig, window);
      out << std::left << std::setw(16) << sim::to_string(sig) << std::right << "mean "
          << deg_str(m.mean) << " deg, p2p " << deg_str(m.peak_to_peak) << " deg over the last "
          << window << " s";
      if (std::isfinite(m.period)) out << ", period " << m.period << " s";
      out << '\n';
    }
  }
  out << "max residuals   constraint " << traj.max_constraint_residual << ", aero "
      << traj.max_aero_residual << '\n';
}

int run_simulate(const CommonOptions& o, bool no_stick) {
  const config::RunConfig cfg = load(o);
  const sim::Trajectory traj = sim::simulate(cfg.scenario);
  const fs::path dir = cfg.output.directory;
  io::write_trajectory_csv(traj, dir / cfg.output.trajectory_csv);
  if (!no_stick)
    io::write_stick_diagram(traj, cfg.scenario.morphology, cfg.output.stick_stride,
                            dir / cfg.output.stick_svg, dir / cfg.output.stick_csv);
  std::ostringstream summary;
  print_summary(summary, cfg, traj);
  {
    std::ofstream f = io::open_output(dir / "summary.txt");
    f << summary.str();
  }
  std::cout << summary.str() << "outputs written to " << dir.string() << '\n';
  return traj.failed ? kDiverged : kOk;
}

int run_sweep(const CommonOptions& o, const std::vector<std::string>& grid, unsigned workers,
              double window) {
  const config::RunConfig cfg = load(o);
  std::vector<sweep::GridAxis> axes;
  for (const std::string& spec : grid) axes.push_back(sweep::parse_axis(spec));
  sweep::SweepOptions opt;
  opt.workers = workers;
  opt.metrics_window = window;
  const sweep::SweepResult result = sweep::run_sweep(cfg, axes, opt);
  const fs::path path = fs::path(cfg.output.directory) / "sweep.csv";
  sweep::write_sweep_csv(result, path);
  std::size_t failed = 0, settled = 0;
  for (const auto& r : result.rows) {
    failed += r.failed;
    settled += r.settling_time.has_value();
  }
  std::cout << result.rows.size() << " runs, " << failed << " failed, " << settled
            << " settled (5 deg band, 1 s dwell); table written to " << path.string() << '\n';
  return kOk;
}

int run_compare(const CommonOptions& o, const std::string& imu, const std::string& trajectory,
                double start, double end) {
  const config::RunConfig cfg = load(o);
  const io::AttitudeSeries exp = io::attitude_series(io::ingest_imu_log(imu));
  io::AttitudeSeries simulated;
  if (!trajectory.empty()) {
    simulated = io::attitude_series(io::read_trajectory_csv(trajectory));
  } else {
    const sim::Trajectory traj = sim::simulate(cfg.scenario);
    if (traj.failed) std::cerr << "warning: simulation failed: " << traj.failure << '\n';
    simulated = io::attitude_series(traj);
  }
  const io::ComparisonReport report = io::compare(simulated, exp, start, end);
  const fs::path dir = cfg.output.directory;
  {
    std::ofstream f = io::open_output(dir / "comparison.txt");
    io::write_comparison_text(report, f);
  }
  io::write_comparison_csv(report, dir / "comparison.csv");
  io::write_comparison_text(report, std::cout);
  return kOk;
}

int run_gait_preview(const CommonOptions& o, int samples) {
  const config::RunConfig cfg = load(o);
  const fs::path path = fs::path(cfg.output.directory) / "gait_cycle.csv";
  io::write_gait_cycle_csv(cfg.scenario.gait, samples, path);
  std::cout << "one gait cycle (" << 1.0 / cfg.scenario.gait.flap_frequency << " s, " << samples
            << " samples) written to " << path.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// validate: invariant checks on a configuration
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

GeneralizedCoordinates random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GeneralizedCoordinates gc;
  for (int i = 0; i < 8; ++i) {
    gc.q[i] = (i < 3 ? 0.5 : 1.2) * u(rng);
    gc.qdot[i] = 3.0 * u(rng);
  }
  return gc;
}

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(2) << v;
  return ss.str();
}

std::vector<Check> invariant_checks(const config::RunConfig& cfg) {
  const sim::ScenarioConfig& sc = cfg.scenario;
  const MorphologyConfig& morph = sc.morphology;
  std::vector<Check> checks;
  std::mt19937_64 rng(12345);

  double orth = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Mat3 r = euler_to_rotation(random_state(rng).q.segment<3>(coord::kRoll) * 2.5);
    orth = std::max(orth, (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff());
  }
  checks.push_back({"rotation orthogonality", orth < 1e-12, sci(orth)});

  const auto elements = build_blade_elements(morph);
  double width = 0.0;
  for (const auto& e : elements) width += e.dy;
  const double width_err = std::abs(width - morph.wingspan) / morph.wingspan;
  checks.push_back({"blade element widths sum to span", width_err < 1e-9, sci(width_err)});

  bool spd = true;
  double asym = 0.0, work = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const GeneralizedCoordinates gc = random_state(rng);
    const auto terms = dynamics::mass_matrix_and_bias(gc, morph);
    Mat8 raw = terms.M;
    asym = std::max(asym, (raw - raw.transpose()).cwiseAbs().maxCoeff());
    spd = spd && Eigen::SelfAdjointEigenSolver<Mat8>(raw).eigenvalues().minCoeff() > 0.0;
    const ChainKinematics chain = compute_chain(gc, morph);
    const BodyPoint pt{BodyId::LeftDistal, Vec3(0.01, -0.03, 0.0)};
    const Vec3 f(0.3, -0.2, 0.5);
    const double lhs = dynamics::generalized_force_map(chain, pt, f).dot(gc.qdot);
    const double rhs = f.dot(point_velocity(chain, pt));
    work = std::max(work, std::abs(lhs - rhs));
  }
  checks.push_back({"mass matrix symmetric positive definite", spd && asym < 1e-12,
                    "asymmetry " + sci(asym)});
  checks.push_back({"virtual work identity", work < 1e-10, sci(work)});

  {
    sim::ScenarioConfig vac = sc;
    vac.aero.enabled = false;
    for (auto& t : vac.thrusters.thrusters) t.magnitude = 0.0;
    vac.gait.shoulder_amplitude = vac.gait.elbow_amplitude = 0.0;
    vac.sim.dt = 1e-4;
    vac.sim.duration = 1.0;
    const sim::Trajectory traj = sim::simulate(vac);
    const double e0 = dynamics::total_energy(traj.snapshots.front().state.coords, morph);
    double de = 0.0;
    for (const auto& s : traj.snapshots)
      de = std::max(de, std::abs(dynamics::total_energy(s.state.coords, morph) - e0));
    checks.push_back({"vacuum energy conservation (1 s, dt 1e-4)", !traj.failed && de < 1e-6,
                      sci(de) + " J"});
  }

  const sim::Trajectory traj = sim::simulate(sc);
  checks.push_back({"scenario runs without divergence", !traj.failed,
                    traj.failed ? traj.failure : "end time " + std::to_string(traj.end_time()) + " s"});
  checks.push_back({"gait constraint residual", traj.max_constraint_residual < 1e-9,
                    sci(traj.max_constraint_residual)});
  checks.push_back({"aerodynamic solve residual", traj.max_aero_residual < 1e-9,
                    sci(traj.max_aero_residual)});
  return checks;
}

int run_validate(const CommonOptions& o, bool print_config) {
  const config::RunConfig cfg = load(o);
  std::cout << "config OK: " << (o.config.empty() ? std::string("built-in scenario") : o.config)
            << '\n';
  if (print_config) std::cout << config::to_json(cfg);
  bool all = true;
  for (const Check& c : invariant_checks(cfg)) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    all = all && c.ok;
  }
  return all ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aerobat flapping-wing flight simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  bool no_stick = false;
  auto* simulate = app.add_subcommand("simulate", "Run one closed-loop simulation");
  add_common(simulate, common);
  simulate->add_flag("--no-stick", no_stick, "Skip the stick diagram");

  std::vector<std::string> grid;
  unsigned workers = 0;
  double window = 2.0;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  add_common(sweep, common);
  sweep->add_option("--grid", grid, "Axis 'path=v1,v2' (repeatable; dotted path or JSON pointer)")
      ->required();
  sweep->add_option("--workers", workers, "Worker threads (0: all cores)");
  sweep->add_option("--window", window, "Trailing metrics window, s")->check(CLI::PositiveNumber);

  std::string imu, trajectory;
  double start = 0.0, end = 0.0;
  auto* compare = app.add_subcommand("compare", "Compare simulated attitude with an IMU log");
  add_common(compare, common);
  compare->add_option("--imu", imu, "IMU CSV (t,roll,pitch,yaw in degrees)")->required();
  compare->add_option("--trajectory", trajectory, "Trajectory CSV instead of a fresh simulation");
  compare->add_option("--start", start, "Window start, s")->required();
  compare->add_option("--end", end, "Window end, s")->required();

  int samples = 101;
  auto* gait = app.add_subcommand("gait-preview", "Dump one gait cycle");
  add_common(gait, common);
  gait->add_option("--samples", samples, "Samples over the cycle")->check(CLI::Range(2, 1000000));

  bool print_config = false;
  auto* validate = app.add_subcommand("validate", "Check a config and run the invariant suite");
  add_common(validate, common, false);
  validate->add_flag("--print-config", print_config, "Print the fully expanded config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_simulate(common, no_stick);
    if (*sweep) return run_sweep(common, grid, workers, window);
    if (*compare) return run_compare(common, imu, trajectory, start, end);
    if (*gait) return run_gait_preview(common, samples);
    if (*validate) return run_validate(common, print_config);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
