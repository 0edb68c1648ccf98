#pragma once

// Coupled flight simulation: gait -> blade-element kinematics -> unsteady
// lifting line -> thrusters -> generalized forces -> constrained dynamics,
// integrated with fixed-step RK4.

#include "aerobat/aero.hpp"
#include "aerobat/control.hpp"
#include "aerobat/dynamics.hpp"
#include "aerobat/kinematics.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aerobat::sim {

struct AeroSettings {
  bool enabled = true;
  aero::WagnerCoefficients wagner;
  aero::WagnerOde ode = aero::WagnerOde::Leibniz;
  aero::SpeedModel speed_model = aero::SpeedModel::Global;
  double min_reference_speed = 0.1;          // floor on the lifting-line U, m/s
  std::optional<double> lag_reference_speed; // unset: initial forward airspeed
  Vec3 freestream = Vec3::Zero();

  bool operator==(const AeroSettings&) const = default;
};

struct ControllerSettings {
  control::AttitudeReference reference;
  double hold_interval = 0.0;  // s; 0 re-evaluates the law every step

  bool operator==(const ControllerSettings&) const = default;
};

struct SimSettings {
  double dt = 5e-4;
  double duration = 8.0;
  Vec3 initial_position = Vec3::Zero();
  Vec3 initial_velocity = Vec3(-2.0, 0.0, 0.0);  // inertial; -x is forward
  Vec3 initial_euler = Vec3(deg2rad(-5.0), deg2rad(15.0), 0.0);
  Vec3 initial_euler_rates = Vec3::Zero();
  bool gait_constraint = true;  // false leaves shoulder/elbow free
  double divergence_threshold = 1e6;

  bool operator==(const SimSettings&) const = default;
};

struct ScenarioConfig {
  std::string name = "paper_scenario";
  MorphologyConfig morphology = default_morphology();
  KSGaitConfig gait;
  AeroSettings aero;
  ControllerSettings controller;
  control::ThrusterLayout thrusters = control::default_layout();
  SimSettings sim;

  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Launch at 2 m/s, 4.75 Hz flapping, pitch/roll 15/-5 deg, references 20/0 deg.
ScenarioConfig paper_scenario();

struct SimState {
  double t = 0.0;
  GeneralizedCoordinates coords;
  aero::AeroState aero;

  /// 16 + 3m
  int dimension() const { return 16 + 3 * aero.size(); }
  VecX pack() const;
  static SimState unpack(double t, const VecX& x, int m);
  bool finite() const;
};

struct StateDerivative {
  Vec8 qdot = Vec8::Zero();
  Vec8 qddot = Vec8::Zero();
  VecX a_dot, z1_dot, z2_dot;

  // Diagnostics at this evaluation.
  Vec2 lambda = Vec2::Zero();
  Vec2 gait_accel = Vec2::Zero();
  double constraint_residual = 0.0;
  double aero_residual = 0.0;
  VecX cl;
  VecX downwash;
  Vec3 aero_force = Vec3::Zero();
  dynamics::GeneralizedForces generalized;
  std::vector<aero::ElementForce> element_forces;
  std::vector<AppliedForce> thruster_forces;

  VecX pack() const;
};

/// Immutable per-scenario data reused by every derivative evaluation.
class SimModel {
 public:
  explicit SimModel(ScenarioConfig cfg);

  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<BladeElement>& elements() const { return line_.elements(); }
  const aero::LiftingLine& lifting_line() const { return line_; }
  double lag_speed() const { return lag_speed_; }

  SimState initial_state() const;
  control::ThrusterCommand command(const SimState& s) const;

  /// Lifting-line U for the global speed model: forward airspeed, floored.
  double reference_speed(const GeneralizedCoordinates& gc) const;

 private:
  ScenarioConfig cfg_;
  aero::LiftingLine line_;
  double lag_speed_ = 2.0;
};

StateDerivative state_derivative(const SimModel& model, const SimState& s,
                                 const control::ThrusterCommand& cmd);

/// Classical RK4 on a flat state vector.
template <class F>
VecX rk4_step(F&& f, double t, const VecX& x, double dt) {
  const VecX k1 = f(t, x);
  const VecX k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const VecX k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const VecX k4 = f(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One RK4 step with the thruster command held over all stages; Euler angles
/// are re-wrapped afterwards. `first_stage`, when given, is reused as k1.
SimState step_rk4(const SimModel& model, const SimState& s, double dt,
                  const control::ThrusterCommand& cmd,
                  const StateDerivative* first_stage = nullptr);

struct Snapshot {
  SimState state;
  control::ThrusterCommand command;
  Vec2 lambda = Vec2::Zero();
  VecX cl;
  double total_lift = 0.0;  // inertial z of the summed aerodynamic force, N
  double constraint_residual = 0.0;
  double aero_residual = 0.0;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<Snapshot> snapshots;
  bool failed = false;
  std::string failure;
  double max_constraint_residual = 0.0;
  double max_aero_residual = 0.0;

  double start_time() const { return snapshots.empty() ? 0.0 : snapshots.front().state.t; }
  double end_time() const { return snapshots.empty() ? 0.0 : snapshots.back().state.t; }
};

/// Runs to the configured duration or until divergence (partial trajectory,
/// failed = true). Deterministic: identical inputs give bit-identical output.
Trajectory simulate(const SimModel& model);
Trajectory simulate(const ScenarioConfig& cfg);

enum class Signal { Roll, Pitch, Yaw, Shoulder, Elbow, Px, Py, Pz };

std::string to_string(Signal s);
Signal signal_from_string(const std::string& s);
/// SI units (rad, m).
double signal_value(const Snapshot& s, Signal sig);

struct SignalMetrics {
  double mean = 0.0;
  double peak_to_peak = 0.0;
  double period = 0.0;  // NaN with fewer than two upward mean crossings
  int cycles = 0;
  double start = 0.0;
  double end = 0.0;
};

/// Metrics of a sampled signal over [start, end]. The mean is the time average
/// over whole cycles (between the first and last upward mean crossing) when
/// at least one full cycle is present; the period is the mean spacing of those
/// crossings. Throws std::invalid_argument if the samples do not cover the window.
SignalMetrics signal_metrics(std::span<const double> t, std::span<const double> v, double start,
                             double end);

/// signal_metrics over the trailing `window` seconds of the trajectory.
SignalMetrics limit_cycle_metrics(const Trajectory& traj, Signal sig, double window);

/// First time both attitude errors remain inside `band` for `dwell` seconds.
std::optional<double> settling_time(const Trajectory& traj, const control::AttitudeReference& ref,
                                    double band = deg2rad(5.0), double dwell = 1.0);

}  // namespace aerobat::sim
