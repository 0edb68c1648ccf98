#include "aerobat/dynamics.hpp"

#include "aerobat/errors.hpp"

namespace aerobat::dynamics {

namespace {

BodyId proximal_of(Side s) {
  return s == Side::Left ? BodyId::LeftProximal : BodyId::RightProximal;
}
BodyId distal_of(Side s) { return s == Side::Left ? BodyId::LeftDistal : BodyId::RightDistal; }

// Velocity-product (qdd = 0) part of the angular accelerations.
std::array<Vec3, kNumBodies> bias_angular_accel(const ChainKinematics& chain,
                                                const GeneralizedCoordinates& gc) {
  const Vec3 rates = gc.euler_rates();
  const Mat3& e = chain.euler_rates;
  const Vec3 yaw_frame = rates[2] * e.col(2);
  const Vec3 pitch_frame = yaw_frame + rates[1] * e.col(1);

  std::array<Vec3, kNumBodies> alpha;
  const Vec3 body = pitch_frame.cross(rates[0] * e.col(0)) + yaw_frame.cross(rates[1] * e.col(1));
  alpha[index_of(BodyId::Body)] = body;
  const double dqs = gc.qdot[coord::kShoulder], dqe = gc.qdot[coord::kElbow];
  const Vec3& w_body = chain.frame(BodyId::Body).omega;
  for (Side s : {Side::Left, Side::Right}) {
    const auto si = static_cast<std::size_t>(s);
    const Vec3 prox = body + dqs * w_body.cross(chain.shoulder_axis[si]);
    const Vec3& w_prox = chain.frame(proximal_of(s)).omega;
    alpha[index_of(proximal_of(s))] = prox;
    alpha[index_of(distal_of(s))] = prox + dqe * w_prox.cross(chain.elbow_axis[si]);
  }
  return alpha;
}

Vec3 rigid_bias(const Vec3& base, const Vec3& alpha, const Vec3& omega, const Vec3& r) {
  return base + alpha.cross(r) + omega.cross(omega.cross(r));
}

// Velocity-product part of the linear acceleration of a material point.
Vec3 bias_linear_accel(const ChainKinematics& chain, const std::array<Vec3, kNumBodies>& alpha,
                       BodyId id, const Vec3& x) {
  const SegmentFrame& body = chain.frame(BodyId::Body);
  const Vec3& a_body = alpha[index_of(BodyId::Body)];
  if (id == BodyId::Body) return rigid_bias(Vec3::Zero(), a_body, body.omega, x - body.origin);

  const Side s = side_of(id);
  const SegmentFrame& prox = chain.frame(proximal_of(s));
  const Vec3 shoulder =
      rigid_bias(Vec3::Zero(), a_body, body.omega, prox.origin - body.origin);
  const Vec3& a_prox = alpha[index_of(proximal_of(s))];
  if (!is_distal(id)) return rigid_bias(shoulder, a_prox, prox.omega, x - prox.origin);

  const SegmentFrame& dist = chain.frame(distal_of(s));
  const Vec3 elbow = rigid_bias(shoulder, a_prox, prox.omega, dist.origin - prox.origin);
  return rigid_bias(elbow, alpha[index_of(id)], dist.omega, x - dist.origin);
}

}  // namespace

Mat28 constraint_jacobian() {
  Mat28 jc = Mat28::Zero();
  jc(0, coord::kShoulder) = 1.0;
  jc(1, coord::kElbow) = 1.0;
  return jc;
}

Mat38 point_jacobian(const ChainKinematics& chain, const BodyPoint& pt) {
  Mat38 j = Mat38::Zero();
  const Vec3 x = point_position(chain, pt);
  const Vec3 r = x - chain.frame(BodyId::Body).origin;
  j.block<3, 3>(0, coord::kPx).setIdentity();
  for (int k = 0; k < 3; ++k) j.col(coord::kRoll + k) = chain.euler_rates.col(k).cross(r);
  if (is_wing(pt.body)) {
    const Side s = side_of(pt.body);
    const auto si = static_cast<std::size_t>(s);
    j.col(coord::kShoulder) =
        chain.shoulder_axis[si].cross(x - chain.frame(proximal_of(s)).origin);
    if (is_distal(pt.body))
      j.col(coord::kElbow) = chain.elbow_axis[si].cross(x - chain.frame(distal_of(s)).origin);
  }
  return j;
}

Mat38 angular_jacobian(const ChainKinematics& chain, BodyId body) {
  Mat38 j = Mat38::Zero();
  j.block<3, 3>(0, coord::kRoll) = chain.euler_rates;
  if (is_wing(body)) {
    const auto si = static_cast<std::size_t>(side_of(body));
    j.col(coord::kShoulder) = chain.shoulder_axis[si];
    if (is_distal(body)) j.col(coord::kElbow) = chain.elbow_axis[si];
  }
  return j;
}

DynamicsTerms mass_matrix_and_bias(const GeneralizedCoordinates& gc,
                                   const MorphologyConfig& morph, double gravity) {
  return mass_matrix_and_bias(compute_chain(gc, morph), gc, morph, gravity);
}

DynamicsTerms mass_matrix_and_bias(const ChainKinematics& chain, const GeneralizedCoordinates& gc,
                                   const MorphologyConfig& morph, double gravity) {
  const auto alpha = bias_angular_accel(chain, gc);
  const Vec3 g(0.0, 0.0, -gravity);

  DynamicsTerms t;
  t.M.setZero();
  t.h.setZero();
  t.Jc = constraint_jacobian();
  for (BodyId id : kAllBodies) {
    const RigidBodyProperties props = body_properties(id, morph);
    const SegmentFrame& f = chain.frame(id);
    const BodyPoint com{id, props.com};
    const Vec3 x = point_position(chain, com);
    const Mat38 jv = point_jacobian(chain, com);
    const Mat38 jw = angular_jacobian(chain, id);
    const Mat3 inertia = f.rotation * props.inertia * f.rotation.transpose();

    t.M.noalias() += props.mass * jv.transpose() * jv + jw.transpose() * inertia * jw;

    const Vec3 a_bias = bias_linear_accel(chain, alpha, id, x);
    const Vec3 spin = inertia * f.omega;
    t.h.noalias() += jv.transpose() * (props.mass * (g - a_bias));
    t.h.noalias() -= jw.transpose() * (inertia * alpha[index_of(id)] + f.omega.cross(spin));
  }
  // Symmetrize away round-off from the accumulation.
  t.M = 0.5 * (t.M + t.M.transpose()).eval();
  return t;
}

Vec8 generalized_force_map(const ChainKinematics& chain, const BodyPoint& pt, const Vec3& f) {
  return point_jacobian(chain, pt).transpose() * f;
}

Vec8 generalized_force_map(const GeneralizedCoordinates& gc, const MorphologyConfig& morph,
                           const BodyPoint& pt, const Vec3& f) {
  return generalized_force_map(compute_chain(gc, morph), pt, f);
}

GeneralizedForces assemble_generalized_forces(const ChainKinematics& chain,
                                              std::span<const AppliedForce> aero_forces,
                                              std::span<const AppliedForce> thruster_forces) {
  GeneralizedForces u;
  for (const AppliedForce& f : aero_forces) u.aero += generalized_force_map(chain, f.point, f.force);
  for (const AppliedForce& f : thruster_forces)
    u.thrust += generalized_force_map(chain, f.point, f.force);
  return u;
}

ConstrainedSolution constrained_accel_solve(const DynamicsTerms& terms, const Vec8& u_a,
                                            const Vec8& u_t, const Vec2& y_ks) {
  Eigen::LLT<Mat8> llt(terms.M);
  if (llt.info() != Eigen::Success)
    throw SimulationError("constrained_accel_solve: mass matrix is not positive definite");
  const Vec8 rhs = terms.h + u_a + u_t;
  const Vec8 free = llt.solve(rhs);
  const Eigen::Matrix<double, 8, 2> minv_jt = llt.solve(terms.Jc.transpose());
  const Eigen::Matrix2d schur = terms.Jc * minv_jt;
  Eigen::LDLT<Eigen::Matrix2d> ldlt(schur);
  if (ldlt.info() != Eigen::Success || !(std::abs(schur.determinant()) > 0.0))
    throw SimulationError("constrained_accel_solve: singular constraint system");
  ConstrainedSolution sol;
  sol.lambda = ldlt.solve(y_ks - terms.Jc * free);
  sol.qddot = free + minv_jt * sol.lambda;
  return sol;
}

Vec8 unconstrained_accel(const DynamicsTerms& terms, const Vec8& u) {
  Eigen::LLT<Mat8> llt(terms.M);
  if (llt.info() != Eigen::Success)
    throw SimulationError("unconstrained_accel: mass matrix is not positive definite");
  return llt.solve(terms.h + u);
}

double kinetic_energy(const GeneralizedCoordinates& gc, const MorphologyConfig& morph) {
  const ChainKinematics chain = compute_chain(gc, morph);
  double t = 0.0;
  for (BodyId id : kAllBodies) {
    const RigidBodyProperties props = body_properties(id, morph);
    const SegmentFrame& f = chain.frame(id);
    const Vec3 v = point_velocity(chain, {id, props.com});
    const Mat3 inertia = f.rotation * props.inertia * f.rotation.transpose();
    t += 0.5 * props.mass * v.squaredNorm() + 0.5 * f.omega.dot(inertia * f.omega);
  }
  return t;
}

double potential_energy(const GeneralizedCoordinates& gc, const MorphologyConfig& morph,
                        double gravity) {
  const ChainKinematics chain = compute_chain(gc, morph);
  double v = 0.0;
  for (BodyId id : kAllBodies) {
    const RigidBodyProperties props = body_properties(id, morph);
    v += props.mass * gravity * point_position(chain, {id, props.com}).z();
  }
  return v;
}

}  // namespace aerobat::dynamics
