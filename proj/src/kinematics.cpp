#include "aerobat/kinematics.hpp"

#include "aerobat/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aerobat {

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

Mat3 euler_to_rotation(const Vec3& theta) {
  const double cr = std::cos(theta[0]), sr = std::sin(theta[0]);
  const double cp = std::cos(theta[1]), sp = std::sin(theta[1]);
  const double cy = std::cos(theta[2]), sy = std::sin(theta[2]);
  Mat3 r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return r;
}

Mat3 euler_rate_matrix(const Vec3& theta) {
  const double cp = std::cos(theta[1]), sp = std::sin(theta[1]);
  const double cy = std::cos(theta[2]), sy = std::sin(theta[2]);
  Mat3 e;
  // roll axis Rz*Ry*ex, pitch axis Rz*ey, yaw axis ez
  e.col(0) << cy * cp, sy * cp, -sp;
  e.col(1) << -sy, cy, 0.0;
  e.col(2) << 0.0, 0.0, 1.0;
  return e;
}

void GeneralizedCoordinates::wrap_euler() {
  for (int i = coord::kRoll; i <= coord::kYaw; ++i) q[i] = wrap_angle(q[i]);
}

// ---------------------------------------------------------------------------

void KSGaitConfig::validate() const {
  if (!(flap_frequency > 0.0) || flap_frequency > 8.0)
    throw ConfigError("gait: flap_frequency must satisfy 0 < f <= 8 Hz");
  if (!(shoulder_amplitude >= 0.0)) throw ConfigError("gait: shoulder_amplitude must be >= 0");
  if (!(elbow_amplitude >= 0.0)) throw ConfigError("gait: elbow_amplitude must be >= 0");
  if (!std::isfinite(shoulder_offset) || !std::isfinite(elbow_offset) ||
      !std::isfinite(elbow_phase_lag))
    throw ConfigError("gait: offsets and phase lag must be finite");
}

GaitSample ks_gait(double t, const KSGaitConfig& cfg) {
  const double w = 2.0 * kPi * cfg.flap_frequency;
  const double phase_s = w * t;
  const double phase_e = phase_s + cfg.elbow_phase_lag;
  GaitSample g;
  g.q_s = cfg.shoulder_offset + cfg.shoulder_amplitude * std::cos(phase_s);
  g.dq_s = -cfg.shoulder_amplitude * w * std::sin(phase_s);
  g.ddq_s = -cfg.shoulder_amplitude * w * w * std::cos(phase_s);
  g.q_e = cfg.elbow_offset + cfg.elbow_amplitude * std::cos(phase_e);
  g.dq_e = -cfg.elbow_amplitude * w * std::sin(phase_e);
  g.ddq_e = -cfg.elbow_amplitude * w * w * std::cos(phase_e);
  return g;
}

// ---------------------------------------------------------------------------

std::string to_string(ChordDistribution d) {
  return d == ChordDistribution::Elliptic ? "elliptic" : "trapezoidal";
}

ChordDistribution chord_distribution_from_string(const std::string& s) {
  if (s == "trapezoidal") return ChordDistribution::Trapezoidal;
  if (s == "elliptic") return ChordDistribution::Elliptic;
  throw ConfigError("morphology: chord_distribution must be 'trapezoidal' or 'elliptic', got '" +
                    s + "'");
}

double MorphologyConfig::total_mass() const {
  return body.mass + 2.0 * (proximal.mass + distal.mass);
}

double MorphologyConfig::shoulder_span_offset() const { return std::abs(shoulder_position.y()); }

double MorphologyConfig::distal_length() const {
  return half_span() - shoulder_span_offset() - proximal_length;
}

double MorphologyConfig::chord_at(double y) const {
  const double eta = std::min(1.0, std::abs(y) / half_span());
  if (chord_distribution == ChordDistribution::Elliptic)
    return root_chord * std::sqrt(std::max(0.0, 1.0 - eta * eta));
  return root_chord * (1.0 - (1.0 - tip_chord_ratio) * eta);
}

namespace {

void check_body(const RigidBodyProperties& b, const std::string& name) {
  if (!(b.mass > 0.0) || !std::isfinite(b.mass))
    throw ConfigError("morphology: " + name + " mass must be positive");
  const double scale = b.inertia.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !b.inertia.allFinite())
    throw ConfigError("morphology: " + name + " inertia must be finite and nonzero");
  if ((b.inertia - b.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError("morphology: " + name + " inertia tensor must be symmetric");
  Eigen::LLT<Mat3> llt(b.inertia);
  if (llt.info() != Eigen::Success)
    throw ConfigError("morphology: " + name + " inertia tensor must be positive definite");
  if (!b.com.allFinite()) throw ConfigError("morphology: " + name + " com must be finite");
}

void check_unit(const Vec3& v, const std::string& name) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-12)
    throw ConfigError("morphology: " + name + " must be a unit vector");
}

}  // namespace

void MorphologyConfig::validate() const {
  check_body(body, "body");
  check_body(proximal, "proximal");
  check_body(distal, "distal");
  const double m = total_mass();
  if (!allow_mass_out_of_range && (m < 0.04 || m > 0.08)) {
    std::ostringstream os;
    os << "morphology: total mass " << m
       << " kg outside [0.04, 0.08] kg (set allow_mass_out_of_range to override)";
    throw ConfigError(os.str());
  }
  if (!(wingspan > 0.0)) throw ConfigError("morphology: wingspan must be positive");
  if (!(root_chord > 0.0)) throw ConfigError("morphology: root_chord must be positive");
  if (!(tip_chord_ratio > 0.0) || tip_chord_ratio > 1.0)
    throw ConfigError("morphology: tip_chord_ratio must lie in (0, 1]");
  if (!(lift_slope > 0.0)) throw ConfigError("morphology: lift_slope must be positive");
  if (!(air_density > 0.0)) throw ConfigError("morphology: air_density must be positive");
  if (blade_elements < 4) throw ConfigError("morphology: blade_elements must be >= 4");
  if (!shoulder_position.allFinite() || shoulder_position.y() > 0.0)
    throw ConfigError("morphology: left shoulder_position must be finite with y <= 0");
  check_unit(shoulder_axis, "shoulder_axis");
  check_unit(elbow_axis, "elbow_axis");
  if (!(proximal_length > 0.0)) throw ConfigError("morphology: proximal_length must be positive");
  if (!(distal_length() > 0.0))
    throw ConfigError("morphology: wingspan/2 must exceed shoulder offset + proximal_length");
}

MorphologyConfig default_morphology() {
  MorphologyConfig m;
  // Main body as a 220 x 30 x 30 mm box (fuselage plus gait mechanism).
  m.body.mass = 0.045;
  m.body.inertia = Vec3(0.045 * (0.03 * 0.03 + 0.03 * 0.03) / 12.0,
                        0.045 * (0.22 * 0.22 + 0.03 * 0.03) / 12.0,
                        0.045 * (0.22 * 0.22 + 0.03 * 0.03) / 12.0)
                       .asDiagonal();
  m.body.com = Vec3::Zero();

  // Wing segments as thin plates: span along local y, chord along local x.
  const auto plate = [](double mass, double span, double chord) {
    const double ixx = mass * span * span / 12.0;
    const double iyy = mass * chord * chord / 12.0;
    return Mat3(Vec3(ixx, iyy, ixx + iyy).asDiagonal());
  };
  m.shoulder_position = Vec3(0.003, -0.01, 0.007);
  m.shoulder_axis = -Vec3::UnitX();
  m.proximal_length = 0.06;
  m.elbow_axis = Vec3::UnitZ();
  m.wingspan = 0.30;
  m.root_chord = 0.19;
  m.chord_distribution = ChordDistribution::Trapezoidal;
  m.tip_chord_ratio = 0.4;

  m.proximal.mass = 0.003;
  m.proximal.inertia = plate(0.003, 0.06, 0.16);
  m.proximal.com = Vec3(0.021, -0.03, 0.0);
  m.distal.mass = 0.002;
  m.distal.inertia = plate(0.002, 0.08, 0.105);
  m.distal.com = Vec3(0.015, -0.04, 0.0);

  m.lift_slope = 2.0 * kPi;
  m.air_density = 1.225;
  m.blade_elements = 16;
  return m;
}

// ---------------------------------------------------------------------------

BodyId BladeElement::body() const {
  switch (segment) {
    case Segment::Body:
      return BodyId::Body;
    case Segment::Proximal:
      return side == Side::Left ? BodyId::LeftProximal : BodyId::RightProximal;
    case Segment::Distal:
      return side == Side::Left ? BodyId::LeftDistal : BodyId::RightDistal;
  }
  return BodyId::Body;
}

std::vector<BladeElement> build_blade_elements(const MorphologyConfig& morph) {
  const int n = morph.blade_elements;
  if (n < 4) throw std::invalid_argument("build_blade_elements: N_b must be >= 4");
  const double half = morph.half_span();
  const double step = kPi / (n + 1);

  // Half-angle boundaries, pinned to 0 and pi at the tips.
  std::vector<double> edge(n + 1);
  edge[0] = 0.0;
  edge[n] = kPi;
  for (int k = 1; k < n; ++k) edge[k] = (k + 0.5) * step;

  std::vector<BladeElement> out(n);
  for (int i = 1; i <= n; ++i) {
    BladeElement& e = out[i - 1];
    e.index = i;
    e.theta = i * step;
  }
  // Mirror pairs share bit-identical |y|, chord and width.
  for (int i = 1; 2 * i <= n + 1; ++i) {
    const int j = n + 1 - i;
    double y = half * std::cos(i * step);
    double dy = half * (std::cos(edge[i - 1]) - std::cos(edge[i]));
    if (i == j) {
      y = 0.0;
      dy = 2.0 * half * std::cos(edge[i - 1]);
    }
    out[i - 1].y = y;
    out[i - 1].dy = dy;
    out[j - 1].y = -y;
    out[j - 1].dy = dy;
  }

  const double offset = morph.shoulder_span_offset();
  for (auto& e : out) {
    const double r = std::abs(e.y);
    e.chord = morph.chord_at(e.y);
    e.side = e.y > 0.0 ? Side::Right : Side::Left;
    if (r <= offset) {
      e.segment = Segment::Body;
      e.radius = r;
    } else if (r <= offset + morph.proximal_length) {
      e.segment = Segment::Proximal;
      e.radius = r - offset;
    } else {
      e.segment = Segment::Distal;
      e.radius = r - offset - morph.proximal_length;
    }
  }
  return out;
}

BodyPoint quarter_chord_point(const BladeElement& e, const MorphologyConfig& morph) {
  if (e.segment == Segment::Body) {
    return {BodyId::Body, Vec3(morph.shoulder_position.x(), e.y, morph.shoulder_position.z())};
  }
  return {e.body(), mirror_local(e.side, Vec3(0.0, -e.radius, 0.0))};
}

// ---------------------------------------------------------------------------

Vec3 mirror_local(Side side, const Vec3& v) {
  return side == Side::Left ? v : Vec3(v.x(), -v.y(), v.z());
}

Vec3 mirror_axis(Side side, const Vec3& a) {
  return side == Side::Left ? a : Vec3(-a.x(), a.y(), -a.z());
}

Mat3 mirror_inertia(Side side, const Mat3& inertia) {
  if (side == Side::Left) return inertia;
  const Mat3 m = Vec3(1.0, -1.0, 1.0).asDiagonal();
  return m * inertia * m;
}

RigidBodyProperties body_properties(BodyId id, const MorphologyConfig& morph) {
  if (id == BodyId::Body) return morph.body;
  const RigidBodyProperties& left = is_distal(id) ? morph.distal : morph.proximal;
  const Side side = side_of(id);
  return {left.mass, mirror_inertia(side, left.inertia), mirror_local(side, left.com)};
}

ChainKinematics compute_chain(const GeneralizedCoordinates& gc, const MorphologyConfig& morph) {
  ChainKinematics chain;
  const Vec3 theta = gc.euler();
  const Mat3 rb = euler_to_rotation(theta);
  chain.euler_rates = euler_rate_matrix(theta);

  SegmentFrame& body = chain.frames[index_of(BodyId::Body)];
  body.origin = gc.position();
  body.rotation = rb;
  body.omega = chain.euler_rates * gc.euler_rates();
  body.origin_velocity = gc.velocity();

  const double qs = gc.shoulder(), qe = gc.elbow();
  const double dqs = gc.qdot[coord::kShoulder], dqe = gc.qdot[coord::kElbow];
  const Vec3 elbow_left_local(0.0, -morph.proximal_length, 0.0);

  for (Side side : {Side::Left, Side::Right}) {
    const auto s = static_cast<std::size_t>(side);
    const BodyId prox_id = side == Side::Left ? BodyId::LeftProximal : BodyId::RightProximal;
    const BodyId dist_id = side == Side::Left ? BodyId::LeftDistal : BodyId::RightDistal;

    const Vec3 shoulder_local = rb * mirror_local(side, morph.shoulder_position);
    const Vec3 axis_s = mirror_axis(side, morph.shoulder_axis);
    SegmentFrame& prox = chain.frames[index_of(prox_id)];
    prox.origin = body.origin + shoulder_local;
    prox.origin_velocity = body.origin_velocity + body.omega.cross(shoulder_local);
    prox.rotation = rb * Eigen::AngleAxisd(qs, axis_s).toRotationMatrix();
    chain.shoulder_axis[s] = rb * axis_s;
    prox.omega = body.omega + dqs * chain.shoulder_axis[s];

    const Vec3 elbow_local = prox.rotation * mirror_local(side, elbow_left_local);
    const Vec3 axis_e = mirror_axis(side, morph.elbow_axis);
    SegmentFrame& dist = chain.frames[index_of(dist_id)];
    dist.origin = prox.origin + elbow_local;
    dist.origin_velocity = prox.origin_velocity + prox.omega.cross(elbow_local);
    dist.rotation = prox.rotation * Eigen::AngleAxisd(qe, axis_e).toRotationMatrix();
    chain.elbow_axis[s] = prox.rotation * axis_e;
    dist.omega = prox.omega + dqe * chain.elbow_axis[s];
  }
  return chain;
}

Vec3 point_position(const ChainKinematics& chain, const BodyPoint& pt) {
  const SegmentFrame& f = chain.frame(pt.body);
  return f.origin + f.rotation * pt.local;
}

Vec3 point_velocity(const ChainKinematics& chain, const BodyPoint& pt) {
  const SegmentFrame& f = chain.frame(pt.body);
  return f.origin_velocity + f.omega.cross(f.rotation * pt.local);
}

BladeElementKinematics blade_element_kinematics(const ChainKinematics& chain,
                                                const BladeElement& element,
                                                const MorphologyConfig& morph,
                                                const Vec3& freestream) {
  const BodyPoint pt = quarter_chord_point(element, morph);
  const SegmentFrame& f = chain.frame(pt.body);
  BladeElementKinematics k;
  k.position = point_position(chain, pt);
  k.velocity = point_velocity(chain, pt);
  k.normal = f.rotation.col(2);
  k.chord_axis = f.rotation.col(0);
  k.span_axis = element.side == Side::Left ? Vec3(-f.rotation.col(1)) : Vec3(f.rotation.col(1));
  const Vec3 air = freestream - k.velocity;
  k.air = air;
  k.v_n = air.dot(k.normal);
  k.v_e = air.dot(k.chord_axis);
  k.in_plane_speed = (air - air.dot(k.span_axis) * k.span_axis).norm();
  return k;
}

BladeElementKinematics blade_element_kinematics(const GeneralizedCoordinates& gc,
                                                const BladeElement& element,
                                                const MorphologyConfig& morph,
                                                const Vec3& freestream) {
  return blade_element_kinematics(compute_chain(gc, morph), element, morph, freestream);
}

std::array<Vec3, 4> wing_chain_points(const ChainKinematics& chain, Side side,
                                      const MorphologyConfig& morph) {
  const BodyId prox = side == Side::Left ? BodyId::LeftProximal : BodyId::RightProximal;
  const BodyId dist = side == Side::Left ? BodyId::LeftDistal : BodyId::RightDistal;
  const BodyPoint tip{dist, mirror_local(side, Vec3(0.0, -morph.distal_length(), 0.0))};
  return {chain.frame(BodyId::Body).origin, chain.frame(prox).origin, chain.frame(dist).origin,
          point_position(chain, tip)};
}

}  // namespace aerobat
