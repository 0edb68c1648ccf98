#include "aerobat/errors.hpp"
#include "aerobat/sim.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace aerobat;
using namespace aerobat::sim;

namespace {

ScenarioConfig vacuum() {
  ScenarioConfig c = paper_scenario();
  c.aero.enabled = false;
  for (auto& t : c.thrusters.thrusters) t.magnitude = 0.0;
  c.gait.shoulder_amplitude = c.gait.elbow_amplitude = 0.0;
  return c;
}

double max_attitude_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < std::min(a.snapshots.size(), b.snapshots.size()); ++i)
    gap = std::max(gap, (a.snapshots[i].state.coords.q - b.snapshots[i].state.coords.q).cwiseAbs().maxCoeff());
  return gap;
}

}  // namespace

TEST_CASE("default scenario values") {
  const ScenarioConfig c = paper_scenario();
  CHECK(c.sim.initial_velocity.norm() == doctest::Approx(2.0));
  CHECK(c.sim.initial_velocity.x() < 0.0);
  CHECK(c.gait.flap_frequency == 4.75);
  CHECK(c.sim.initial_euler[0] == doctest::Approx(deg2rad(-5.0)));
  CHECK(c.sim.initial_euler[1] == doctest::Approx(deg2rad(15.0)));
  CHECK(c.controller.reference.roll == 0.0);
  CHECK(c.controller.reference.pitch == doctest::Approx(deg2rad(20.0)));
  CHECK(c.sim.dt == 5e-4);
  CHECK(c.sim.duration == 8.0);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("scenario validation") {
  ScenarioConfig c = paper_scenario();
  c.sim.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = paper_scenario();
  c.sim.duration = 1e-4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sim.duration = 0.0;
  CHECK_NOTHROW(c.validate());
  c = paper_scenario();
  c.aero.min_reference_speed = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = paper_scenario();
  c.controller.hold_interval = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("state layout: dimension 16 + 3m and pack/unpack round trip") {
  const SimModel model(paper_scenario());
  SimState s = model.initial_state();
  const int m = s.aero.size();
  CHECK(m == 16);
  CHECK(s.dimension() == 16 + 3 * m);
  std::mt19937_64 rng(51);
  std::normal_distribution<double> g;
  VecX x(s.dimension());
  for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
  const SimState u = SimState::unpack(1.5, x, m);
  CHECK(u.t == 1.5);
  CHECK((u.pack() - x).norm() == 0.0);
  CHECK(u.finite());
  x[20] = NAN;
  CHECK_FALSE(SimState::unpack(0.0, x, m).finite());
}

TEST_CASE("initial state follows the gait and starts with zero aero states") {
  const SimModel model(paper_scenario());
  const SimState s = model.initial_state();
  const GaitSample g = ks_gait(0.0, model.config().gait);
  CHECK(s.coords.q[coord::kShoulder] == g.q_s);
  CHECK(s.coords.qdot[coord::kElbow] == g.dq_e);
  CHECK(s.aero.a.norm() == 0.0);
  CHECK(s.aero.z1.norm() == 0.0);
  CHECK(model.lag_speed() == doctest::Approx(2.0 * std::cos(deg2rad(15.0))));
}

TEST_CASE("state_derivative: free fall in vacuum") {
  const SimModel model(vacuum());
  SimState s = model.initial_state();
  s.coords.qdot.setZero();
  const StateDerivative d = state_derivative(model, s, model.command(s));
  CHECK(d.qddot[coord::kPz] == doctest::Approx(-9.81));
  CHECK(std::abs(d.qddot[coord::kPx]) < 1e-12);
  CHECK(std::abs(d.qddot[coord::kPitch]) < 1e-12);
  CHECK(d.a_dot.norm() == 0.0);
}

TEST_CASE("state_derivative is deterministic and consistent with the aero module") {
  const SimModel model(paper_scenario());
  SimState s = model.initial_state();
  std::mt19937_64 rng(52);
  std::normal_distribution<double> g;
  for (int i = 0; i < s.aero.size(); ++i) {
    s.aero.a[i] = 0.01 * g(rng);
    s.aero.z1[i] = 0.1 * g(rng);
    s.aero.z2[i] = 0.1 * g(rng);
  }
  const auto cmd = model.command(s);
  const StateDerivative d1 = state_derivative(model, s, cmd);
  const StateDerivative d2 = state_derivative(model, s, cmd);
  CHECK((d1.pack() - d2.pack()).cwiseAbs().maxCoeff() == 0.0);

  const ChainKinematics chain = compute_chain(s.coords, model.config().morphology);
  const double u = model.reference_speed(s.coords);
  const auto& el = model.elements();
  for (int i = 0; i < s.aero.size(); ++i) {
    const auto k = blade_element_kinematics(chain, el[i], model.config().morphology);
    const double w = k.v_n + aero::induced_downwash(s.aero.a, el[i].theta,
                                                    model.lifting_line().params(), u);
    const auto [dz1, dz2] =
        aero::wagner_state_rates(w, s.aero.z1[i], s.aero.z2[i], model.lag_speed(), 0.5 * el[i].chord);
    CHECK(d1.z1_dot[i] == doctest::Approx(dz1));
    CHECK(d1.z2_dot[i] == doctest::Approx(dz2));
    CHECK(d1.downwash[i] == doctest::Approx(w));
  }
  CHECK(d1.constraint_residual < 1e-9);
  CHECK(d1.aero_residual < 1e-9);
  CHECK(d1.gait_accel[0] == ks_gait(0.0, model.config().gait).ddq_s);
}

TEST_CASE("rk4_step: exact on a constant field, fourth order on a linear system") {
  auto constant = [](double, const VecX& x) { return VecX::Constant(x.size(), 1.5); };
  VecX x0 = VecX::Constant(3, 2.0);
  CHECK((rk4_step(constant, 0.0, x0, 0.3) - VecX::Constant(3, 2.45)).norm() < 1e-15);

  Eigen::Matrix2d a;
  a << 0.0, 1.0, -4.0, -0.4;
  auto linear = [&](double, const VecX& x) -> VecX { return a * x; };
  VecX x(2);
  x << 1.0, 0.0;
  const VecX exact = (a * 2.0).exp() * x;
  auto error = [&](int n) {
    VecX y = x;
    const double h = 2.0 / n;
    for (int k = 0; k < n; ++k) y = rk4_step(linear, k * h, y, h);
    return (y - exact).norm();
  };
  const double ratio = error(100) / error(200);
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("step_rk4: stepping back with -dt returns to the start in vacuum") {
  ScenarioConfig c = vacuum();
  c.sim.gait_constraint = false;
  c.sim.initial_euler_rates = Vec3(0.5, -0.3, 0.2);
  const SimModel model(c);
  const SimState s0 = model.initial_state();
  const control::ThrusterCommand cmd = model.command(s0);
  for (double dt : {1e-3, 2e-3}) {
    const SimState s1 = step_rk4(model, s0, dt, cmd);
    const SimState back = step_rk4(model, s1, -dt, cmd);
    const double err = (back.pack() - s0.pack()).cwiseAbs().maxCoeff();
    CHECK(err < 50 * std::pow(dt, 5) + 1e-13);
  }
}

TEST_CASE("simulate: zero duration yields the initial snapshot") {
  ScenarioConfig c = paper_scenario();
  c.sim.duration = 0.0;
  const Trajectory traj = simulate(c);
  REQUIRE(traj.snapshots.size() == 1);
  CHECK(traj.snapshots[0].state.t == 0.0);
  CHECK_FALSE(traj.failed);
}

TEST_CASE("simulate: uniform timestamps, residual bounds and determinism") {
  ScenarioConfig c = paper_scenario();
  c.sim.duration = 0.5;
  const Trajectory a = simulate(c), b = simulate(c);
  REQUIRE(a.snapshots.size() == 1001);
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].state.t == static_cast<double>(i) * c.sim.dt);
    CHECK(a.snapshots[i].constraint_residual < 1e-9);
    CHECK(a.snapshots[i].command.exclusive());
  }
  CHECK(a.max_constraint_residual < 1e-9);
  CHECK(a.max_aero_residual < 1e-9);
  CHECK(max_attitude_gap(a, b) == 0.0);
  for (std::size_t i = 0; i < a.snapshots.size(); ++i)
    CHECK((a.snapshots[i].state.pack() - b.snapshots[i].state.pack()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate: the gait constraint is tracked") {
  ScenarioConfig c = paper_scenario();
  c.sim.duration = 0.3;
  const Trajectory traj = simulate(c);
  double worst = 0.0;
  for (const Snapshot& s : traj.snapshots) {
    const GaitSample g = ks_gait(s.state.t, c.gait);
    worst = std::max(worst, std::abs(s.state.coords.q[coord::kShoulder] - g.q_s));
    worst = std::max(worst, std::abs(s.state.coords.q[coord::kElbow] - g.q_e));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("simulate: divergence gives a partial, flagged trajectory") {
  ScenarioConfig c = paper_scenario();
  c.sim.duration = 1.0;
  c.sim.divergence_threshold = 10.0;  // exceeded by the shoulder rate
  const Trajectory traj = simulate(c);
  CHECK(traj.failed);
  CHECK(traj.failure.find("diverged") != std::string::npos);
  CHECK(traj.snapshots.size() >= 1);
  CHECK(traj.snapshots.size() < 2001);
}

TEST_CASE("vacuum energy conservation at dt = 1e-4 over 1 s") {
  ScenarioConfig c = vacuum();
  c.sim.dt = 1e-4;
  c.sim.duration = 1.0;
  c.sim.initial_euler_rates = Vec3(0.4, -0.6, 0.3);
  const Trajectory traj = simulate(c);
  REQUIRE_FALSE(traj.failed);
  const double e0 = dynamics::total_energy(traj.snapshots.front().state.coords, c.morphology);
  double de = 0.0;
  for (const Snapshot& s : traj.snapshots)
    de = std::max(de, std::abs(dynamics::total_energy(s.state.coords, c.morphology) - e0));
  CHECK(de < 1e-6);
}

TEST_CASE("hold interval resamples the command at its period") {
  ScenarioConfig c = paper_scenario();
  c.sim.duration = 2.0;
  c.controller.hold_interval = 0.05;
  const Trajectory traj = simulate(c);
  int changes = 0;
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
    if (traj.snapshots[i].command == traj.snapshots[i - 1].command) continue;
    ++changes;
    const double t = traj.snapshots[i].state.t;
    CHECK(std::abs(t / 0.05 - std::round(t / 0.05)) < 1e-6);
  }
  CHECK(changes > 0);
}

TEST_CASE("dt convergence of the default scenario") {
  ScenarioConfig c = paper_scenario();
  const Trajectory coarse = simulate(c);
  c.sim.dt *= 0.5;
  const Trajectory fine = simulate(c);
  REQUIRE_FALSE(coarse.failed);
  REQUIRE_FALSE(fine.failed);
  const double diff = std::abs(coarse.snapshots.back().state.coords.q[coord::kPitch] -
                               fine.snapshots.back().state.coords.q[coord::kPitch]);
  CHECK(rad2deg(diff) < 0.1);
}

TEST_CASE("symmetric flight keeps roll and yaw dormant") {
  ScenarioConfig c = paper_scenario();
  c.sim.initial_euler[0] = 0.0;
  c.thrusters.thrusters[2].magnitude = c.thrusters.thrusters[3].magnitude = 0.0;
  const Trajectory traj = simulate(c);
  REQUIRE_FALSE(traj.failed);
  double worst = 0.0;
  for (const Snapshot& s : traj.snapshots)
    worst = std::max({worst, std::abs(s.state.coords.q[coord::kRoll]),
                      std::abs(s.state.coords.q[coord::kYaw]), std::abs(s.state.coords.q[coord::kPy])});
  CHECK(worst < 1e-8);
}

TEST_CASE("signal_metrics on synthetic signals") {
  std::vector<double> t, v, flat;
  for (int k = 0; k <= 4000; ++k) {
    t.push_back(k * 5e-4);
    v.push_back(3.0 + 2.0 * std::sin(2 * kPi * 4.75 * t.back()));
    flat.push_back(1.25);
  }
  const SignalMetrics m = signal_metrics(t, v, 0.0, 2.0);
  CHECK(m.mean == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(m.peak_to_peak == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(m.period == doctest::Approx(1.0 / 4.75).epsilon(1e-6));
  CHECK(m.cycles == 8);

  const SignalMetrics c = signal_metrics(t, flat, 0.5, 1.5);
  CHECK(c.mean == 1.25);
  CHECK(c.peak_to_peak == 0.0);
  CHECK(std::isnan(c.period));

  CHECK_THROWS_AS(signal_metrics(t, v, 1.0, 2.5), std::invalid_argument);
  CHECK_THROWS_AS(signal_metrics(t, v, -0.5, 1.0), std::invalid_argument);
}

TEST_CASE("limit_cycle_metrics and settling_time on a trajectory") {
  Trajectory traj;
  traj.dt = 0.01;
  const control::AttitudeReference ref{0.0, deg2rad(20.0)};
  for (int k = 0; k <= 800; ++k) {
    Snapshot s;
    s.state.t = k * 0.01;
    const double decay = std::exp(-s.state.t);
    s.state.coords.q[coord::kPitch] = ref.pitch + deg2rad(30.0) * decay;
    s.state.coords.q[coord::kRoll] = deg2rad(-5.0) * decay;
    traj.snapshots.push_back(s);
  }
  // 30 exp(-t) < 5 after t = ln 6.
  const auto settle = settling_time(traj, ref);
  REQUIRE(settle.has_value());
  CHECK(*settle == doctest::Approx(std::log(6.0)).epsilon(0.01));
  CHECK_FALSE(settling_time(traj, ref, deg2rad(5.0), 7.0).has_value());

  const SignalMetrics m = limit_cycle_metrics(traj, Signal::Pitch, 2.0);
  CHECK(m.start == doctest::Approx(6.0));
  CHECK(m.end == doctest::Approx(8.0));
  CHECK_THROWS_AS(limit_cycle_metrics(traj, Signal::Pitch, 9.0), std::invalid_argument);
  CHECK(signal_from_string("pitch") == Signal::Pitch);
  CHECK_THROWS_AS(signal_from_string("heading"), std::invalid_argument);
}
