#pragma once

// Unsteady lifting-line aerodynamics with Wagner-function lag states.
//
// The bound circulation over the full span is a sine series in the
// collocation angle theta (y = (S/2) cos theta):
//
//   Gamma(y) = 1/2 a0 c0 U sum_n a_n sin(n theta)
//
// Each blade element carries two lag states z1, z2 that turn the Duhamel
// convolution of the indicial (Jones) response into first-order ODEs. The
// Fourier-coefficient rates follow from equating the series form of the
// sectional lift coefficient with the lag-state form at every station.

#include "aerobat/kinematics.hpp"
#include "aerobat/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace aerobat::aero {

struct WagnerCoefficients {
  double psi1 = 0.165;
  double psi2 = 0.335;
  double eps1 = 0.0455;
  double eps2 = 0.3;

  double phi0() const { return 1.0 - (psi1 + psi2); }
  void validate() const;
  bool operator==(const WagnerCoefficients&) const = default;
};

/// Jones approximation of the Wagner function, t_norm >= 0.
double wagner_phi(double t_norm, const WagnerCoefficients& coeffs = {});

/// Lag-state ODE variant. Leibniz is the exact time derivative of the
/// convolution integral; AsPrinted keeps the alternative grouping
/// (psi eps U/b) * (w - (eps U/b) z), retained only to demonstrate that it does
/// not reproduce the convolution.
enum class WagnerOde { Leibniz, AsPrinted };

/// Global: one reference speed (body forward airspeed) for every station.
/// PerElement: each station uses its own chordwise airspeed.
enum class SpeedModel { Global, PerElement };

std::string to_string(WagnerOde v);
std::string to_string(SpeedModel v);
WagnerOde wagner_ode_from_string(const std::string& s);
SpeedModel speed_model_from_string(const std::string& s);

struct LiftingLineParams {
  double span = 0.3;         // S, m
  double root_chord = 0.1;   // c0, m
  double lift_slope = 2.0 * kPi;  // a0, 1/rad
};

struct AeroState {
  VecX a;   // Fourier coefficients
  VecX z1;  // lag states, m/s
  VecX z2;

  AeroState() = default;
  explicit AeroState(int m) : a(VecX::Zero(m)), z1(VecX::Zero(m)), z2(VecX::Zero(m)) {}
  int size() const { return static_cast<int>(a.size()); }
  bool consistent() const { return z1.size() == a.size() && z2.size() == a.size(); }
  bool finite() const { return a.allFinite() && z1.allFinite() && z2.allFinite(); }
};

struct AeroEnvironment {
  Vec3 freestream = Vec3::Zero();  // inertial, m/s
  double density = 1.225;          // kg/m^3
  double reference_speed = 2.0;    // U used by the lag-state dynamics, m/s
};

/// sin(n theta) / sin(theta), evaluated as the Chebyshev polynomial
/// U_{n-1}(cos theta) so the endpoint limits n and n(-1)^{n+1} come out exactly.
double sine_ratio(int n, double theta);

double circulation(const VecX& a, double y, const LiftingLineParams& p, double speed);

double induced_downwash(const VecX& a, double theta, const LiftingLineParams& p, double speed);

inline double total_downwash(double v_n, double w_y) { return v_n + w_y; }

/// Returns (dz1/dt, dz2/dt) for one station with half-chord b.
std::pair<double, double> wagner_state_rates(double w, double z1, double z2, double speed,
                                             double half_chord,
                                             const WagnerCoefficients& coeffs = {},
                                             WagnerOde ode = WagnerOde::Leibniz);

/// c_L = (a0 / U) (w Phi(0) + z1 + z2).
double sectional_cl_from_states(double w, double z1, double z2, double speed, double lift_slope,
                                const WagnerCoefficients& coeffs = {});

/// C_L = a0 sum_n [(c0 / c_i) a_n + (c0 / U) da_n/dt] sin(n theta_i).
double sectional_cl_fourier(const VecX& a, const VecX& a_dot, double theta, double chord,
                            const LiftingLineParams& p, double speed);

struct AeroRates {
  VecX a_dot;
  VecX z1_dot;
  VecX z2_dot;
  VecX induced;   // w_y per station
  VecX downwash;  // w = v_n + w_y per station
  VecX cl;        // sectional lift coefficient per station
  double residual = 0.0;  // max |series c_L - lag-state c_L| over stations
};

/// Square m x m lifting-line system over a fixed set of collocation stations.
/// The matrix c0 sin(n theta_i) is factorized once at construction; the object
/// is immutable afterwards and safe to share between threads.
class LiftingLine {
 public:
  LiftingLine(std::vector<BladeElement> elements, LiftingLineParams params,
              WagnerCoefficients coeffs = {}, WagnerOde ode = WagnerOde::Leibniz);

  /// Evaluates all aerodynamic state rates. `speed` holds U per station (all
  /// equal for the global speed model); `lag_speed` is the reference speed of
  /// the normalized time in the lag dynamics.
  AeroRates rates(const AeroState& state, const VecX& v_n, const VecX& speed,
                  double lag_speed) const;

  int size() const { return static_cast<int>(elements_.size()); }
  const std::vector<BladeElement>& elements() const { return elements_; }
  const LiftingLineParams& params() const { return params_; }
  const WagnerCoefficients& coefficients() const { return coeffs_; }
  WagnerOde ode() const { return ode_; }
  /// sin(n theta_i), rows are stations, columns are modes.
  const MatX& sine_table() const { return sines_; }

 private:
  std::vector<BladeElement> elements_;
  LiftingLineParams params_;
  WagnerCoefficients coeffs_;
  WagnerOde ode_;
  MatX sines_;
  MatX ratio_;  // n sin(n theta_i) / sin(theta_i)
  Eigen::PartialPivLU<MatX> lu_;
};

/// Fourier-coefficient rates from equating both sectional lift forms.
VecX solve_fourier_rates(const LiftingLine& line, const AeroState& state, const VecX& v_n,
                         const VecX& speed);

struct ElementForce {
  AppliedForce applied;      // inertial force at the quarter-chord point
  Vec3 position = Vec3::Zero();
  double cl = 0.0;
  double dynamic_pressure_speed = 0.0;
};

/// Per-element lift: |F| = 1/2 rho V^2 c dy c_L, perpendicular to the in-plane
/// relative flow and signed toward the wing normal. Elements with V < 1e-6 m/s
/// carry no force.
std::vector<ElementForce> element_lift_forces(const std::vector<BladeElementKinematics>& kin,
                                              const VecX& cl,
                                              const std::vector<BladeElement>& elements,
                                              const MorphologyConfig& morph, double density);

}  // namespace aerobat::aero
