#include "aerobat/sim.hpp"

#include "aerobat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aerobat::sim {

void ScenarioConfig::validate() const {
  morphology.validate();
  gait.validate();
  thrusters.validate();
  aero.wagner.validate();
  if (!(aero.min_reference_speed > 0.0))
    throw ConfigError("aero: min_reference_speed must be positive");
  if (aero.lag_reference_speed && !(*aero.lag_reference_speed > 0.0))
    throw ConfigError("aero: lag_reference_speed must be positive");
  if (!aero.freestream.allFinite()) throw ConfigError("aero: freestream must be finite");
  if (!std::isfinite(controller.reference.roll) || !std::isfinite(controller.reference.pitch))
    throw ConfigError("controller: references must be finite");
  if (!(controller.hold_interval >= 0.0))
    throw ConfigError("controller: hold_interval must be >= 0");
  if (!(sim.dt > 0.0)) throw ConfigError("sim: dt must be positive");
  if (!(sim.duration >= 0.0)) throw ConfigError("sim: duration must be >= 0");
  if (sim.duration > 0.0 && sim.duration < sim.dt)
    throw ConfigError("sim: duration must be >= dt (or exactly 0)");
  if (!sim.initial_position.allFinite() || !sim.initial_velocity.allFinite() ||
      !sim.initial_euler.allFinite() || !sim.initial_euler_rates.allFinite())
    throw ConfigError("sim: initial conditions must be finite");
  if (!(sim.divergence_threshold > 0.0))
    throw ConfigError("sim: divergence_threshold must be positive");
}

ScenarioConfig paper_scenario() { return ScenarioConfig{}; }

// ---------------------------------------------------------------------------

VecX SimState::pack() const {
  const int m = aero.size();
  VecX x(dimension());
  x.segment<8>(0) = coords.q;
  x.segment<8>(8) = coords.qdot;
  x.segment(16, m) = aero.a;
  x.segment(16 + m, m) = aero.z1;
  x.segment(16 + 2 * m, m) = aero.z2;
  return x;
}

SimState SimState::unpack(double t, const VecX& x, int m) {
  SimState s;
  s.t = t;
  s.coords.q = x.segment<8>(0);
  s.coords.qdot = x.segment<8>(8);
  s.aero.a = x.segment(16, m);
  s.aero.z1 = x.segment(16 + m, m);
  s.aero.z2 = x.segment(16 + 2 * m, m);
  return s;
}

bool SimState::finite() const {
  return std::isfinite(t) && coords.q.allFinite() && coords.qdot.allFinite() && aero.finite();
}

VecX StateDerivative::pack() const {
  const auto m = a_dot.size();
  VecX x(16 + 3 * m);
  x.segment<8>(0) = qdot;
  x.segment<8>(8) = qddot;
  x.segment(16, m) = a_dot;
  x.segment(16 + m, m) = z1_dot;
  x.segment(16 + 2 * m, m) = z2_dot;
  return x;
}

// ---------------------------------------------------------------------------

namespace {

double forward_airspeed(const Mat3& body_rotation, const Vec3& velocity, const Vec3& freestream) {
  // Forward is body -x.
  return -(body_rotation.transpose() * (velocity - freestream)).x();
}

}  // namespace

SimModel::SimModel(ScenarioConfig cfg)
    : cfg_(std::move(cfg)),
      line_(build_blade_elements(cfg_.morphology),
            aero::LiftingLineParams{cfg_.morphology.wingspan, cfg_.morphology.root_chord,
                                    cfg_.morphology.lift_slope},
            cfg_.aero.wagner, cfg_.aero.ode) {
  cfg_.validate();
  if (cfg_.aero.lag_reference_speed) {
    lag_speed_ = *cfg_.aero.lag_reference_speed;
  } else {
    const double u = forward_airspeed(euler_to_rotation(cfg_.sim.initial_euler),
                                      cfg_.sim.initial_velocity, cfg_.aero.freestream);
    lag_speed_ = std::max(cfg_.aero.min_reference_speed, std::abs(u));
  }
}

SimState SimModel::initial_state() const {
  SimState s;
  s.t = 0.0;
  const GaitSample g = ks_gait(0.0, cfg_.gait);
  s.coords.q.segment<3>(coord::kPx) = cfg_.sim.initial_position;
  s.coords.q.segment<3>(coord::kRoll) = cfg_.sim.initial_euler;
  s.coords.q[coord::kShoulder] = g.q_s;
  s.coords.q[coord::kElbow] = g.q_e;
  s.coords.qdot.segment<3>(coord::kPx) = cfg_.sim.initial_velocity;
  s.coords.qdot.segment<3>(coord::kRoll) = cfg_.sim.initial_euler_rates;
  s.coords.qdot[coord::kShoulder] = g.dq_s;
  s.coords.qdot[coord::kElbow] = g.dq_e;
  s.coords.wrap_euler();
  s.aero = aero::AeroState(line_.size());
  return s;
}

control::ThrusterCommand SimModel::command(const SimState& s) const {
  return control::bang_bang(s.coords.q[coord::kRoll], s.coords.q[coord::kPitch],
                            cfg_.controller.reference);
}

double SimModel::reference_speed(const GeneralizedCoordinates& gc) const {
  const double u =
      forward_airspeed(euler_to_rotation(gc.euler()), gc.velocity(), cfg_.aero.freestream);
  return std::max(cfg_.aero.min_reference_speed, std::abs(u));
}

StateDerivative state_derivative(const SimModel& model, const SimState& s,
                                 const control::ThrusterCommand& cmd) {
  const ScenarioConfig& cfg = model.config();
  const MorphologyConfig& morph = cfg.morphology;
  const int m = model.lifting_line().size();

  StateDerivative d;
  d.qdot = s.coords.qdot;
  d.a_dot = VecX::Zero(m);
  d.z1_dot = VecX::Zero(m);
  d.z2_dot = VecX::Zero(m);
  d.cl = VecX::Zero(m);
  d.downwash = VecX::Zero(m);

  const GaitSample gait = ks_gait(s.t, cfg.gait);
  d.gait_accel = gait.accel();
  const ChainKinematics chain = compute_chain(s.coords, morph);

  std::vector<AppliedForce> aero_forces;
  if (cfg.aero.enabled) {
    const auto& elements = model.elements();
    std::vector<BladeElementKinematics> kin(elements.size());
    VecX v_n(m), speed(m);
    const double global_speed = model.reference_speed(s.coords);
    for (int i = 0; i < m; ++i) {
      kin[i] = blade_element_kinematics(chain, elements[i], morph, cfg.aero.freestream);
      v_n[i] = kin[i].v_n;
      speed[i] = cfg.aero.speed_model == aero::SpeedModel::Global
                     ? global_speed
                     : std::max(cfg.aero.min_reference_speed, std::abs(kin[i].v_e));
    }
    const aero::AeroRates rates =
        model.lifting_line().rates(s.aero, v_n, speed, model.lag_speed());
    d.a_dot = rates.a_dot;
    d.z1_dot = rates.z1_dot;
    d.z2_dot = rates.z2_dot;
    d.cl = rates.cl;
    d.downwash = rates.downwash;
    d.aero_residual = rates.residual;
    d.element_forces = aero::element_lift_forces(kin, rates.cl, elements, morph, morph.air_density);
    aero_forces.reserve(d.element_forces.size());
    for (const auto& f : d.element_forces) {
      aero_forces.push_back(f.applied);
      d.aero_force += f.applied.force;
    }
  }

  d.thruster_forces =
      control::thruster_forces(cmd, cfg.thrusters, chain.frame(BodyId::Body).rotation);
  d.generalized = dynamics::assemble_generalized_forces(chain, aero_forces, d.thruster_forces);

  const dynamics::DynamicsTerms terms = dynamics::mass_matrix_and_bias(chain, s.coords, morph);
  if (cfg.sim.gait_constraint) {
    const auto sol = dynamics::constrained_accel_solve(terms, d.generalized.aero,
                                                       d.generalized.thrust, d.gait_accel);
    d.qddot = sol.qddot;
    d.lambda = sol.lambda;
    d.constraint_residual = (terms.Jc * d.qddot - d.gait_accel).cwiseAbs().maxCoeff();
  } else {
    d.qddot = dynamics::unconstrained_accel(terms, d.generalized.aero + d.generalized.thrust);
  }
  return d;
}

SimState step_rk4(const SimModel& model, const SimState& s, double dt,
                  const control::ThrusterCommand& cmd, const StateDerivative* first_stage) {
  const int m = model.lifting_line().size();
  bool first = first_stage != nullptr;
  auto f = [&](double t, const VecX& x) -> VecX {
    if (first) {
      first = false;
      return first_stage->pack();
    }
    return state_derivative(model, SimState::unpack(t, x, m), cmd).pack();
  };
  SimState next = SimState::unpack(s.t + dt, rk4_step(f, s.t, s.pack(), dt), m);
  next.coords.wrap_euler();
  return next;
}

Trajectory simulate(const SimModel& model) {
  const ScenarioConfig& cfg = model.config();
  const double dt = cfg.sim.dt;
  const long steps = std::lround(cfg.sim.duration / dt);
  const double hold = cfg.controller.hold_interval;

  Trajectory traj;
  traj.dt = dt;
  traj.snapshots.reserve(static_cast<std::size_t>(steps) + 1);

  SimState state = model.initial_state();
  control::ThrusterCommand cmd = model.command(state);
  double last_command = 0.0;

  for (long k = 0;; ++k) {
    if (k > 0 && (hold <= 0.0 || state.t - last_command >= hold - 1e-12)) {
      cmd = model.command(state);
      last_command = state.t;
    }
    StateDerivative d;
    try {
      d = state_derivative(model, state, cmd);
    } catch (const SimulationError& e) {
      traj.failed = true;
      traj.failure = e.what();
      break;
    }
    Snapshot snap;
    snap.state = state;
    snap.command = cmd;
    snap.lambda = d.lambda;
    snap.cl = d.cl;
    snap.total_lift = d.aero_force.z();
    snap.constraint_residual = d.constraint_residual;
    snap.aero_residual = d.aero_residual;
    traj.max_constraint_residual = std::max(traj.max_constraint_residual, d.constraint_residual);
    traj.max_aero_residual = std::max(traj.max_aero_residual, d.aero_residual);
    traj.snapshots.push_back(std::move(snap));
    if (k == steps) break;

    SimState next;
    try {
      next = step_rk4(model, state, dt, cmd, &d);
    } catch (const SimulationError& e) {
      traj.failed = true;
      traj.failure = e.what();
      break;
    }
    next.t = static_cast<double>(k + 1) * dt;
    const VecX x = next.pack();
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > cfg.sim.divergence_threshold) {
      traj.failed = true;
      traj.failure = "state diverged at t = " + std::to_string(next.t) + " s";
      break;
    }
    state = std::move(next);
  }
  return traj;
}

Trajectory simulate(const ScenarioConfig& cfg) { return simulate(SimModel(cfg)); }

// ---------------------------------------------------------------------------

std::string to_string(Signal s) {
  switch (s) {
    case Signal::Roll: return "roll";
    case Signal::Pitch: return "pitch";
    case Signal::Yaw: return "yaw";
    case Signal::Shoulder: return "shoulder";
    case Signal::Elbow: return "elbow";
    case Signal::Px: return "px";
    case Signal::Py: return "py";
    case Signal::Pz: return "pz";
  }
  return "?";
}

Signal signal_from_string(const std::string& s) {
  for (Signal sig : {Signal::Roll, Signal::Pitch, Signal::Yaw, Signal::Shoulder, Signal::Elbow,
                     Signal::Px, Signal::Py, Signal::Pz}) {
    if (to_string(sig) == s) return sig;
  }
  throw std::invalid_argument("unknown signal '" + s + "'");
}

double signal_value(const Snapshot& s, Signal sig) {
  const Vec8& q = s.state.coords.q;
  switch (sig) {
    case Signal::Roll: return q[coord::kRoll];
    case Signal::Pitch: return q[coord::kPitch];
    case Signal::Yaw: return q[coord::kYaw];
    case Signal::Shoulder: return q[coord::kShoulder];
    case Signal::Elbow: return q[coord::kElbow];
    case Signal::Px: return q[coord::kPx];
    case Signal::Py: return q[coord::kPy];
    case Signal::Pz: return q[coord::kPz];
  }
  return 0.0;
}

namespace {

// Integral of the piecewise-linear interpolant of (t, v) over [a, b].
double integrate_linear(std::span<const double> t, std::span<const double> v, double a, double b) {
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double lo = std::max(a, t[j]);
    const double hi = std::min(b, t[j + 1]);
    if (hi <= lo) continue;
    const double slope = (v[j + 1] - v[j]) / (t[j + 1] - t[j]);
    const double vlo = v[j] + slope * (lo - t[j]);
    const double vhi = v[j] + slope * (hi - t[j]);
    sum += 0.5 * (vlo + vhi) * (hi - lo);
  }
  return sum;
}

std::vector<double> upward_crossings(std::span<const double> t, std::span<const double> v,
                                     double level) {
  std::vector<double> out;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double a = v[j] - level, b = v[j + 1] - level;
    if (a < 0.0 && b >= 0.0) out.push_back(t[j] + (t[j + 1] - t[j]) * (-a) / (b - a));
  }
  return out;
}

}  // namespace

SignalMetrics signal_metrics(std::span<const double> t, std::span<const double> v, double start,
                             double end) {
  if (t.size() != v.size() || t.empty()) throw std::invalid_argument("signal_metrics: no samples");
  const double tol = 1e-9 * std::max(1.0, std::abs(end));
  if (!(end >= start)) throw std::invalid_argument("signal_metrics: window end before start");
  if (start < t.front() - tol || end > t.back() + tol)
    throw std::invalid_argument("signal_metrics: window [" + std::to_string(start) + ", " +
                                std::to_string(end) + "] s not covered by the data [" +
                                std::to_string(t.front()) + ", " + std::to_string(t.back()) +
                                "] s");

  std::size_t lo = 0;
  while (lo < t.size() && t[lo] < start - tol) ++lo;
  std::size_t hi = lo;
  while (hi < t.size() && t[hi] <= end + tol) ++hi;
  const auto tw = t.subspan(lo, hi - lo);
  const auto vw = v.subspan(lo, hi - lo);
  if (tw.empty()) throw std::invalid_argument("signal_metrics: window contains no samples");

  SignalMetrics out;
  out.start = start;
  out.end = end;
  const auto [mn, mx] = std::minmax_element(vw.begin(), vw.end());
  out.peak_to_peak = *mx - *mn;

  double mean = 0.0;
  for (double x : vw) mean += x;
  mean /= static_cast<double>(vw.size());

  std::vector<double> crossings;
  for (int iter = 0; iter < 4; ++iter) {
    crossings = upward_crossings(tw, vw, mean);
    if (crossings.size() < 2) break;
    const double a = crossings.front(), b = crossings.back();
    mean = integrate_linear(tw, vw, a, b) / (b - a);
  }
  crossings = upward_crossings(tw, vw, mean);
  out.mean = mean;
  if (crossings.size() >= 2) {
    out.cycles = static_cast<int>(crossings.size()) - 1;
    out.period = (crossings.back() - crossings.front()) / out.cycles;
  } else {
    out.period = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

SignalMetrics limit_cycle_metrics(const Trajectory& traj, Signal sig, double window) {
  if (traj.snapshots.empty()) throw std::invalid_argument("limit_cycle_metrics: empty trajectory");
  const double span = traj.end_time() - traj.start_time();
  if (!(window >= 0.0) || window > span + 1e-9)
    throw std::invalid_argument("limit_cycle_metrics: window " + std::to_string(window) +
                                " s longer than trajectory span " + std::to_string(span) + " s");
  std::vector<double> t, v;
  t.reserve(traj.snapshots.size());
  v.reserve(traj.snapshots.size());
  for (const Snapshot& s : traj.snapshots) {
    t.push_back(s.state.t);
    v.push_back(signal_value(s, sig));
  }
  const double end = traj.end_time();
  return signal_metrics(t, v, std::max(traj.start_time(), end - window), end);
}

std::optional<double> settling_time(const Trajectory& traj, const control::AttitudeReference& ref,
                                    double band, double dwell) {
  std::optional<double> run_start;
  for (const Snapshot& s : traj.snapshots) {
    const double er = std::abs(s.state.coords.q[coord::kRoll] - ref.roll);
    const double ep = std::abs(s.state.coords.q[coord::kPitch] - ref.pitch);
    if (er < band && ep < band) {
      if (!run_start) run_start = s.state.t;
      if (s.state.t - *run_start >= dwell - 1e-12) return run_start;
    } else {
      run_start.reset();
    }
  }
  return std::nullopt;
}

}  // namespace aerobat::sim
