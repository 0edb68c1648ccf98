#pragma once

// Euler-Lagrange dynamics of the five-body model (main body plus proximal and
// distal wing segments on both sides), written as projected Newton-Euler
// equations over body Jacobians:
//
//   M(q) qdd = h(q, qd) + u_a + u_t + Jc^T lambda,   Jc qdd = y_ks
//
// M = sum_k (Jv_k^T m_k Jv_k + Jw_k^T I_k Jw_k) and h collects gravity and the
// velocity-product terms -Jv^T m (dJv qd) - Jw^T (I dJw qd + w x I w), with the
// bias accelerations dJ qd propagated recursively along the chain.

#include "aerobat/kinematics.hpp"
#include "aerobat/types.hpp"

#include <span>

namespace aerobat::dynamics {

struct DynamicsTerms {
  Mat8 M = Mat8::Identity();
  Vec8 h = Vec8::Zero();
  Mat28 Jc = Mat28::Zero();
};

/// Rows select q_s and q_e.
Mat28 constraint_jacobian();

/// Linear (3 x 8) Jacobian of a material point: d(point velocity)/d(qdot).
Mat38 point_jacobian(const ChainKinematics& chain, const BodyPoint& pt);

/// Angular (3 x 8) Jacobian of a body.
Mat38 angular_jacobian(const ChainKinematics& chain, BodyId body);

DynamicsTerms mass_matrix_and_bias(const GeneralizedCoordinates& gc,
                                   const MorphologyConfig& morph, double gravity = kGravity);
/// Same, reusing an already computed chain for `gc`.
DynamicsTerms mass_matrix_and_bias(const ChainKinematics& chain, const GeneralizedCoordinates& gc,
                                   const MorphologyConfig& morph, double gravity = kGravity);

/// B f with B = (d pdot / d qdot)^T for the application point.
Vec8 generalized_force_map(const ChainKinematics& chain, const BodyPoint& pt, const Vec3& f);
Vec8 generalized_force_map(const GeneralizedCoordinates& gc, const MorphologyConfig& morph,
                           const BodyPoint& pt, const Vec3& f);

struct GeneralizedForces {
  Vec8 aero = Vec8::Zero();
  Vec8 thrust = Vec8::Zero();
};

GeneralizedForces assemble_generalized_forces(const ChainKinematics& chain,
                                              std::span<const AppliedForce> aero_forces,
                                              std::span<const AppliedForce> thruster_forces);

struct ConstrainedSolution {
  Vec8 qddot = Vec8::Zero();
  Vec2 lambda = Vec2::Zero();
};

/// Solves [M, -Jc^T; Jc, 0] [qdd; lambda] = [h + u_a + u_t; y_ks] through the
/// 2 x 2 Schur complement. Throws SimulationError if M is not positive definite.
ConstrainedSolution constrained_accel_solve(const DynamicsTerms& terms, const Vec8& u_a,
                                            const Vec8& u_t, const Vec2& y_ks);

/// qdd = M^-1 (h + u), no gait constraint.
Vec8 unconstrained_accel(const DynamicsTerms& terms, const Vec8& u);

double kinetic_energy(const GeneralizedCoordinates& gc, const MorphologyConfig& morph);
double potential_energy(const GeneralizedCoordinates& gc, const MorphologyConfig& morph,
                        double gravity = kGravity);
inline double total_energy(const GeneralizedCoordinates& gc, const MorphologyConfig& morph,
                           double gravity = kGravity) {
  return kinetic_energy(gc, morph) + potential_energy(gc, morph, gravity);
}

}  // namespace aerobat::dynamics
