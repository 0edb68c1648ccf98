#include "aerobat/aero.hpp"
#include "aerobat/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aerobat;
using namespace aerobat::aero;

namespace {

LiftingLineParams example_params() { return {0.3, 0.1, 2.0 * kPi}; }

VecX unit(int m, int n) {
  VecX a = VecX::Zero(m);
  a[n - 1] = 1.0;
  return a;
}

LiftingLine default_line(int n = 16) {
  MorphologyConfig m = default_morphology();
  m.blade_elements = n;
  return LiftingLine(build_blade_elements(m), {m.wingspan, m.root_chord, m.lift_slope});
}

}  // namespace

TEST_CASE("wagner_phi: values at 0, 10 and large arguments") {
  CHECK(wagner_phi(0.0) == 0.5);
  const double expected10 = 1.0 - 0.165 * std::exp(-0.0455 * 10) - 0.335 * std::exp(-0.3 * 10);
  CHECK(wagner_phi(10.0) == doctest::Approx(expected10).epsilon(1e-14));
  CHECK(wagner_phi(10.0) == doctest::Approx(0.87865).epsilon(1e-5));
  CHECK(wagner_phi(1e4) == doctest::Approx(1.0));
  CHECK(wagner_phi(50.0) > 0.98);
}

TEST_CASE("wagner_phi is monotone and within (0, 1]") {
  double prev = wagner_phi(0.0);
  for (int k = 1; k <= 1000; ++k) {
    const double v = wagner_phi(0.2 * k);
    CHECK(v >= prev);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("WagnerCoefficients defaults and validation") {
  WagnerCoefficients c;
  CHECK(c.psi1 == 0.165);
  CHECK(c.psi2 == 0.335);
  CHECK(c.eps1 == 0.0455);
  CHECK(c.eps2 == 0.3);
  CHECK(c.phi0() == 0.5);
  CHECK_NOTHROW(c.validate());
  c.psi2 = 0.9;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("circulation: zero coefficients, unit mode at the root, tips") {
  const auto p = example_params();
  CHECK(circulation(VecX::Zero(5), 0.03, p, 2.0) == 0.0);
  CHECK(circulation(unit(5, 1), 0.0, p, 2.0) == doctest::Approx(0.5 * 2 * kPi * 0.1 * 2.0));
  CHECK(circulation(unit(5, 1), 0.0, p, 2.0) == doctest::Approx(0.6283).epsilon(1e-4));
  for (int n = 1; n <= 5; ++n) {
    CHECK(circulation(unit(5, n), 0.15, p, 2.0) == 0.0);
    CHECK(circulation(unit(5, n), -0.15, p, 2.0) == 0.0);
    CHECK(std::abs(circulation(unit(5, n), 0.15 - 1e-9, p, 2.0)) < 1e-3);
  }
}

TEST_CASE("induced_downwash: unit mode at the root") {
  const auto p = example_params();
  CHECK(induced_downwash(VecX::Zero(3), 1.0, p, 2.0) == 0.0);
  const double expected = -(2 * kPi * 0.1 * 2.0) / (4 * 0.3);
  CHECK(induced_downwash(unit(3, 1), kPi / 2, p, 2.0) == doctest::Approx(expected));
  CHECK(induced_downwash(unit(3, 1), kPi / 2, p, 2.0) == doctest::Approx(-1.0472).epsilon(1e-4));
}

TEST_CASE("sine_ratio: matches the direct quotient and its endpoint limits") {
  for (int n = 1; n <= 20; ++n) {
    for (double th : {0.1, 0.7, 1.3, 2.2, 3.0})
      CHECK(sine_ratio(n, th) == doctest::Approx(std::sin(n * th) / std::sin(th)).epsilon(1e-10));
    CHECK(sine_ratio(n, 0.0) == n);
    CHECK(sine_ratio(n, kPi) == doctest::Approx(n * (n % 2 ? 1.0 : -1.0)));
    CHECK(sine_ratio(n, 1e-9) == doctest::Approx(n));
  }
}

TEST_CASE("total_downwash adds the two parts") {
  CHECK(total_downwash(0.0, 0.0) == 0.0);
  CHECK(total_downwash(1.0, -0.25) == 0.75);
}

TEST_CASE("wagner_state_rates: rest and steady states") {
  const WagnerCoefficients c;
  const auto [r1, r2] = wagner_state_rates(0.0, 0.0, 0.0, 2.0, 0.05);
  CHECK(r1 == 0.0);
  CHECK(r2 == 0.0);
  const auto [s1, s2] = wagner_state_rates(1.0, c.psi1, c.psi2, 2.0, 0.05);
  CHECK(std::abs(s1) < 1e-15);
  CHECK(std::abs(s2) < 1e-15);
  // Decay rate eps U / b for a state displaced from equilibrium.
  const auto [d1, d2] = wagner_state_rates(0.0, 1.0, 1.0, 2.0, 0.05);
  CHECK(d1 == doctest::Approx(-c.eps1 * 2.0 / 0.05));
  CHECK(d2 == doctest::Approx(-c.eps2 * 2.0 / 0.05));
}

TEST_CASE("wagner_state_rates: the alternative grouping has a different equilibrium") {
  const WagnerCoefficients c;
  const auto [s1, s2] =
      wagner_state_rates(1.0, c.psi1, c.psi2, 2.0, 0.05, c, WagnerOde::AsPrinted);
  CHECK(std::abs(s1) > 1e-3);
  CHECK(std::abs(s2) > 1e-3);
  CHECK(wagner_ode_from_string("as_printed") == WagnerOde::AsPrinted);
  CHECK(wagner_ode_from_string(to_string(WagnerOde::Leibniz)) == WagnerOde::Leibniz);
  CHECK_THROWS_AS(wagner_ode_from_string("printed"), ConfigError);
  CHECK(speed_model_from_string("per_element") == SpeedModel::PerElement);
  CHECK_THROWS_AS(speed_model_from_string("local"), ConfigError);
}

TEST_CASE("sectional_cl_from_states: steady recovery and Wagner initial value") {
  CHECK(sectional_cl_from_states(1.0, 0.165, 0.335, 2.0, 2 * kPi) == doctest::Approx(kPi));
  CHECK(sectional_cl_from_states(0.0, 0.0, 0.0, 2.0, 2 * kPi) == 0.0);
  const double steady = 2 * kPi * 0.7 / 3.0;
  CHECK(sectional_cl_from_states(0.7, 0.0, 0.0, 3.0, 2 * kPi) == doctest::Approx(0.5 * steady));
}

TEST_CASE("sectional_cl_fourier: unit mode and linearity") {
  const auto p = example_params();
  CHECK(sectional_cl_fourier(VecX::Zero(4), VecX::Zero(4), 1.0, 0.08, p, 2.0) == 0.0);
  CHECK(sectional_cl_fourier(unit(4, 1), VecX::Zero(4), kPi / 2, 0.1, p, 2.0) ==
        doctest::Approx(2 * kPi));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  VecX a(6), b(6), da(6), db(6);
  for (int i = 0; i < 6; ++i) a[i] = g(rng), b[i] = g(rng), da[i] = g(rng), db[i] = g(rng);
  const double sum = sectional_cl_fourier(a, da, 0.9, 0.07, p, 2.5) +
                     sectional_cl_fourier(b, db, 0.9, 0.07, p, 2.5);
  CHECK(sectional_cl_fourier(a + b, da + db, 0.9, 0.07, p, 2.5) == doctest::Approx(sum));
}

TEST_CASE("LiftingLine: the Fourier rates make both lift forms agree at every station") {
  const LiftingLine line = default_line();
  const int m = line.size();
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    AeroState s(m);
    VecX v_n(m), speed(m);
    for (int i = 0; i < m; ++i) {
      s.a[i] = 0.05 * g(rng);
      s.z1[i] = 0.1 * g(rng);
      s.z2[i] = 0.1 * g(rng);
      v_n[i] = g(rng);
      speed[i] = 2.0 + 0.5 * std::abs(g(rng));
    }
    const AeroRates r = line.rates(s, v_n, speed, 2.0);
    CHECK(r.residual < 1e-10);
    for (int i = 0; i < m; ++i) {
      const BladeElement& e = line.elements()[i];
      const double w = total_downwash(v_n[i], induced_downwash(s.a, e.theta, line.params(), speed[i]));
      CHECK(r.downwash[i] == doctest::Approx(w));
      const double cl_states = sectional_cl_from_states(w, s.z1[i], s.z2[i], speed[i],
                                                        line.params().lift_slope);
      const double cl_series =
          sectional_cl_fourier(s.a, r.a_dot, e.theta, e.chord, line.params(), speed[i]);
      CHECK(cl_series == doctest::Approx(cl_states).epsilon(1e-9));
      CHECK(r.cl[i] == doctest::Approx(cl_states));
      const auto [dz1, dz2] = wagner_state_rates(w, s.z1[i], s.z2[i], 2.0, 0.5 * e.chord);
      CHECK(r.z1_dot[i] == doctest::Approx(dz1));
      CHECK(r.z2_dot[i] == doctest::Approx(dz2));
    }
    const VecX direct = solve_fourier_rates(line, s, v_n, speed);
    CHECK((direct - r.a_dot).norm() <= 1e-12 * std::max(1.0, r.a_dot.norm()));
  }
}

TEST_CASE("LiftingLine: zero state and zero inflow are at rest") {
  const LiftingLine line = default_line(8);
  const AeroRates r = line.rates(AeroState(8), VecX::Zero(8), VecX::Constant(8, 2.0), 2.0);
  CHECK(r.a_dot.norm() == 0.0);
  CHECK(r.z1_dot.norm() == 0.0);
  CHECK(r.cl.norm() == 0.0);
}

TEST_CASE("LiftingLine rejects coincident stations") {
  MorphologyConfig m = default_morphology();
  m.blade_elements = 6;
  auto el = build_blade_elements(m);
  el[1].theta = el[0].theta;
  CHECK_THROWS_AS(LiftingLine(el, {m.wingspan, m.root_chord, m.lift_slope}), SimulationError);
}

TEST_CASE("element_lift_forces: magnitude and direction") {
  const MorphologyConfig m = default_morphology();
  const auto elements = build_blade_elements(m);
  GeneralizedCoordinates gc;
  gc.qdot[coord::kPx] = -3.0;   // forward flight
  gc.qdot[coord::kPz] = -0.4;   // sinking: air comes from below
  std::vector<BladeElementKinematics> kin;
  for (const auto& e : elements) kin.push_back(blade_element_kinematics(gc, e, m));
  const VecX cl = VecX::Constant(static_cast<int>(elements.size()), 0.5);
  const auto forces = element_lift_forces(kin, cl, elements, m, 1.2);
  const double v2 = 3.0 * 3.0 + 0.4 * 0.4;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const Vec3 f = forces[i].applied.force;
    CHECK(f.norm() == doctest::Approx(0.5 * 1.2 * v2 * elements[i].chord * elements[i].dy * 0.5));
    CHECK(std::abs(f.dot(kin[i].air)) < 1e-15);  // perpendicular to the relative flow
    CHECK(f.z() > 0.0);
  }
  // No relative flow, no force.
  GeneralizedCoordinates still;
  std::vector<BladeElementKinematics> k0;
  for (const auto& e : elements) k0.push_back(blade_element_kinematics(still, e, m));
  for (const auto& f : element_lift_forces(k0, cl, elements, m, 1.2))
    CHECK(f.applied.force.norm() == 0.0);
}
