#include "aerobat/aero.hpp"

#include "aerobat/errors.hpp"

#include <algorithm>
#include <cmath>

namespace aerobat::aero {

void WagnerCoefficients::validate() const {
  if (!(psi1 >= 0.0 && psi2 >= 0.0 && eps1 > 0.0 && eps2 > 0.0))
    throw ConfigError("aero.wagner: coefficients must satisfy psi >= 0 and eps > 0");
  if (!(psi1 + psi2 < 1.0)) throw ConfigError("aero.wagner: psi1 + psi2 must be < 1");
}

double wagner_phi(double t_norm, const WagnerCoefficients& c) {
  return 1.0 - (c.psi1 * std::exp(-c.eps1 * t_norm) + c.psi2 * std::exp(-c.eps2 * t_norm));
}

std::string to_string(WagnerOde v) { return v == WagnerOde::AsPrinted ? "as_printed" : "leibniz"; }
std::string to_string(SpeedModel v) {
  return v == SpeedModel::PerElement ? "per_element" : "global";
}

WagnerOde wagner_ode_from_string(const std::string& s) {
  if (s == "leibniz") return WagnerOde::Leibniz;
  if (s == "as_printed") return WagnerOde::AsPrinted;
  throw ConfigError("aero: wagner_ode must be 'leibniz' or 'as_printed', got '" + s + "'");
}

SpeedModel speed_model_from_string(const std::string& s) {
  if (s == "global") return SpeedModel::Global;
  if (s == "per_element") return SpeedModel::PerElement;
  throw ConfigError("aero: speed_model must be 'global' or 'per_element', got '" + s + "'");
}

double sine_ratio(int n, double theta) {
  const double x = std::cos(theta);
  double prev = 1.0;        // U_0
  if (n == 1) return prev;
  double cur = 2.0 * x;     // U_1
  for (int k = 2; k < n; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double circulation(const VecX& a, double y, const LiftingLineParams& p, double speed) {
  const double ratio = std::clamp(2.0 * y / p.span, -1.0, 1.0);
  const double theta = std::acos(ratio);
  double sum = 0.0;
  for (int n = 1; n <= a.size(); ++n) sum += a[n - 1] * std::sin(n * theta);
  // sin(n theta) at theta = 0 or pi is ~1e-16 rather than 0
  if (ratio == 1.0 || ratio == -1.0) return 0.0;
  return 0.5 * p.lift_slope * p.root_chord * speed * sum;
}

double induced_downwash(const VecX& a, double theta, const LiftingLineParams& p, double speed) {
  double sum = 0.0;
  for (int n = 1; n <= a.size(); ++n) sum += n * a[n - 1] * sine_ratio(n, theta);
  return -p.lift_slope * p.root_chord * speed / (4.0 * p.span) * sum;
}

std::pair<double, double> wagner_state_rates(double w, double z1, double z2, double speed,
                                             double half_chord, const WagnerCoefficients& c,
                                             WagnerOde ode) {
  const double k1 = c.eps1 * speed / half_chord;
  const double k2 = c.eps2 * speed / half_chord;
  if (ode == WagnerOde::AsPrinted) {
    return {c.psi1 * k1 * (w - k1 * z1), c.psi2 * k2 * (w - k2 * z2)};
  }
  return {c.psi1 * k1 * w - k1 * z1, c.psi2 * k2 * w - k2 * z2};
}

double sectional_cl_from_states(double w, double z1, double z2, double speed, double lift_slope,
                                const WagnerCoefficients& c) {
  return lift_slope / speed * (w * c.phi0() + z1 + z2);
}

double sectional_cl_fourier(const VecX& a, const VecX& a_dot, double theta, double chord,
                            const LiftingLineParams& p, double speed) {
  double sum = 0.0;
  for (int n = 1; n <= a.size(); ++n) {
    sum += (p.root_chord / chord * a[n - 1] + p.root_chord / speed * a_dot[n - 1]) *
           std::sin(n * theta);
  }
  return p.lift_slope * sum;
}

// ---------------------------------------------------------------------------

LiftingLine::LiftingLine(std::vector<BladeElement> elements, LiftingLineParams params,
                         WagnerCoefficients coeffs, WagnerOde ode)
    : elements_(std::move(elements)), params_(params), coeffs_(coeffs), ode_(ode) {
  const int m = size();
  if (m == 0) throw SimulationError("lifting line: no collocation stations");
  sines_.resize(m, m);
  ratio_.resize(m, m);
  for (int i = 0; i < m; ++i) {
    const double th = elements_[i].theta;
    for (int n = 1; n <= m; ++n) {
      sines_(i, n - 1) = std::sin(n * th);
      ratio_(i, n - 1) = n * sine_ratio(n, th);
    }
  }
  const MatX system = params_.root_chord * sines_;
  Eigen::FullPivLU<MatX> check(system);
  check.setThreshold(1e-10);
  if (check.rank() < m)
    throw SimulationError("lifting line: singular collocation matrix (coincident stations?)");
  lu_.compute(system);
}

AeroRates LiftingLine::rates(const AeroState& state, const VecX& v_n, const VecX& speed,
                             double lag_speed) const {
  const int m = size();
  const double a0 = params_.lift_slope;
  const double c0 = params_.root_chord;
  const double phi0 = coeffs_.phi0();

  AeroRates r;
  r.z1_dot.resize(m);
  r.z2_dot.resize(m);
  r.cl.resize(m);
  const VecX series = sines_ * state.a;
  r.induced = -(a0 * c0 / (4.0 * params_.span)) * speed.cwiseProduct(ratio_ * state.a);
  r.downwash = v_n + r.induced;

  VecX rhs(m);
  for (int i = 0; i < m; ++i) {
    const double chord = elements_[i].chord;
    const double lagged = r.downwash[i] * phi0 + state.z1[i] + state.z2[i];
    rhs[i] = lagged - speed[i] * c0 / chord * series[i];
    r.cl[i] = a0 / speed[i] * lagged;
    const auto [dz1, dz2] = wagner_state_rates(r.downwash[i], state.z1[i], state.z2[i],
                                               lag_speed, 0.5 * chord, coeffs_, ode_);
    r.z1_dot[i] = dz1;
    r.z2_dot[i] = dz2;
  }
  r.a_dot = lu_.solve(rhs);

  const VecX rate_series = sines_ * r.a_dot;
  double residual = 0.0;
  for (int i = 0; i < m; ++i) {
    const double fourier =
        a0 * (c0 / elements_[i].chord * series[i] + c0 / speed[i] * rate_series[i]);
    residual = std::max(residual, std::abs(fourier - r.cl[i]));
  }
  r.residual = residual;
  return r;
}

VecX solve_fourier_rates(const LiftingLine& line, const AeroState& state, const VecX& v_n,
                         const VecX& speed) {
  return line.rates(state, v_n, speed, speed.mean()).a_dot;
}

std::vector<ElementForce> element_lift_forces(const std::vector<BladeElementKinematics>& kin,
                                              const VecX& cl,
                                              const std::vector<BladeElement>& elements,
                                              const MorphologyConfig& morph, double density) {
  std::vector<ElementForce> out(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const BladeElementKinematics& k = kin[i];
    ElementForce& f = out[i];
    f.applied.point = quarter_chord_point(elements[i], morph);
    f.position = k.position;
    f.cl = cl[static_cast<Eigen::Index>(i)];
    const double speed = k.in_plane_speed;
    f.dynamic_pressure_speed = speed;
    if (speed < 1e-6) continue;
    const Vec3 flow = (k.air - k.air.dot(k.span_axis) * k.span_axis) / speed;
    Vec3 lift_dir = k.normal - k.normal.dot(flow) * flow;
    const double len = lift_dir.norm();
    if (len < 1e-12) continue;
    lift_dir /= len;
    const double magnitude =
        0.5 * density * speed * speed * elements[i].chord * elements[i].dy * f.cl;
    f.applied.force = magnitude * lift_dir;
  }
  return out;
}

}  // namespace aerobat::aero
