#pragma once

// Coordinates, rotations, gait generation and blade-element kinematics.
//
// Frames: the inertial frame has z up. The body frame follows the structural
// convention x aft, y starboard (right), z up, so forward flight is along -x
// and a positive pitch angle raises the nose. Euler angles are intrinsic
// Z-Y-X: R = Rz(yaw) * Ry(pitch) * Rx(roll), mapping body to inertial.

#include "aerobat/types.hpp"

#include <string>
#include <vector>

namespace aerobat {

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

Mat3 euler_to_rotation(const Vec3& theta);

/// Columns map (roll, pitch, yaw) rates to inertial angular velocity.
Mat3 euler_rate_matrix(const Vec3& theta);

struct GeneralizedCoordinates {
  Vec8 q = Vec8::Zero();
  Vec8 qdot = Vec8::Zero();

  Vec3 position() const { return q.segment<3>(coord::kPx); }
  Vec3 velocity() const { return qdot.segment<3>(coord::kPx); }
  Vec3 euler() const { return q.segment<3>(coord::kRoll); }
  Vec3 euler_rates() const { return qdot.segment<3>(coord::kRoll); }
  double shoulder() const { return q[coord::kShoulder]; }
  double elbow() const { return q[coord::kElbow]; }

  void wrap_euler();
};

// ---------------------------------------------------------------------------
// Kinetic-sculpture gait
// ---------------------------------------------------------------------------

struct KSGaitConfig {
  double flap_frequency = 4.75;           // Hz
  double shoulder_amplitude = deg2rad(35.0);
  double shoulder_offset = deg2rad(10.0);
  double elbow_amplitude = deg2rad(30.0);
  double elbow_offset = 0.0;
  double elbow_phase_lag = deg2rad(90.0);

  void validate() const;
  bool operator==(const KSGaitConfig&) const = default;
};

struct GaitSample {
  double q_s = 0.0, q_e = 0.0;
  double dq_s = 0.0, dq_e = 0.0;
  double ddq_s = 0.0, ddq_e = 0.0;

  Vec2 accel() const { return {ddq_s, ddq_e}; }
};

/// q_s = off_s + A_s cos(wt), q_e = off_e + A_e cos(wt + phase), w = 2 pi f.
GaitSample ks_gait(double t, const KSGaitConfig& cfg);

// ---------------------------------------------------------------------------
// Morphology
// ---------------------------------------------------------------------------

struct RigidBodyProperties {
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();  // about the center of mass, local frame
  Vec3 com = Vec3::Zero();      // local frame; the main body's is its origin

  bool operator==(const RigidBodyProperties&) const = default;
};

enum class ChordDistribution { Trapezoidal, Elliptic };

std::string to_string(ChordDistribution d);
ChordDistribution chord_distribution_from_string(const std::string& s);

/// Geometry and mass properties. Wing quantities describe the left wing in
/// its own segment frames (span along local -y, chord along local +x, normal
/// along local +z); the right wing is its mirror image about the body x-z plane.
struct MorphologyConfig {
  RigidBodyProperties body;
  RigidBodyProperties proximal;
  RigidBodyProperties distal;

  Vec3 shoulder_position = Vec3::Zero();     // left shoulder, body frame
  Vec3 shoulder_axis = -Vec3::UnitX();       // left shoulder, body frame
  double proximal_length = 0.0;              // shoulder to elbow, m
  Vec3 elbow_axis = Vec3::UnitZ();           // left elbow, proximal frame

  double wingspan = 0.0;     // S, m
  double root_chord = 0.0;   // c0, m
  ChordDistribution chord_distribution = ChordDistribution::Trapezoidal;
  double tip_chord_ratio = 0.4;
  double lift_slope = 2.0 * kPi;   // a0, 1/rad
  double air_density = 1.225;      // kg/m^3
  int blade_elements = 16;
  bool allow_mass_out_of_range = false;

  double total_mass() const;
  double half_span() const { return 0.5 * wingspan; }
  double shoulder_span_offset() const;
  double distal_length() const;
  double chord_at(double y) const;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;

  bool operator==(const MorphologyConfig&) const = default;
};

/// Defaults used by the bundled scenario (45 g body, 3 g + 2 g per wing side).
MorphologyConfig default_morphology();

// ---------------------------------------------------------------------------
// Blade elements
// ---------------------------------------------------------------------------

enum class Segment { Body, Proximal, Distal };

struct BladeElement {
  int index = 0;        // 1..N_b
  double y = 0.0;       // spanwise station, m (positive to starboard)
  double theta = 0.0;   // collocation angle, y = (S/2) cos(theta)
  double chord = 0.0;
  double dy = 0.0;
  Side side = Side::Left;
  Segment segment = Segment::Proximal;
  double radius = 0.0;  // spanwise distance from the carrying joint, m

  BodyId body() const;
};

/// Stations uniform in theta: theta_i = i pi / (N_b + 1). Throws
/// std::invalid_argument for N_b < 4.
std::vector<BladeElement> build_blade_elements(const MorphologyConfig& morph);

/// Quarter-chord point of an element on its carrying body.
BodyPoint quarter_chord_point(const BladeElement& e, const MorphologyConfig& morph);

// ---------------------------------------------------------------------------
// Forward kinematics of the body/wing chain
// ---------------------------------------------------------------------------

struct SegmentFrame {
  Vec3 origin = Vec3::Zero();           // CoM for the main body, joint for wings
  Mat3 rotation = Mat3::Identity();     // local to inertial
  Vec3 omega = Vec3::Zero();            // inertial angular velocity
  Vec3 origin_velocity = Vec3::Zero();
};

struct ChainKinematics {
  std::array<SegmentFrame, kNumBodies> frames;
  std::array<Vec3, 2> shoulder_axis;     // inertial, indexed by Side
  std::array<Vec3, 2> elbow_axis;        // inertial, indexed by Side
  Mat3 euler_rates = Mat3::Identity();   // euler_rate_matrix(theta)

  const SegmentFrame& frame(BodyId id) const { return frames[index_of(id)]; }
};

ChainKinematics compute_chain(const GeneralizedCoordinates& gc, const MorphologyConfig& morph);

Vec3 point_position(const ChainKinematics& chain, const BodyPoint& pt);
Vec3 point_velocity(const ChainKinematics& chain, const BodyPoint& pt);

/// Local frame description of a point given for the left wing, mapped onto
/// the requested side.
Vec3 mirror_local(Side side, const Vec3& left_local);
/// Same for rotation axes, which reflect as pseudo-vectors.
Vec3 mirror_axis(Side side, const Vec3& left_axis);
/// Inertia tensor reflected onto the requested side.
Mat3 mirror_inertia(Side side, const Mat3& left_inertia);

/// Mass properties of a body in its local frame, mirrored as needed.
RigidBodyProperties body_properties(BodyId id, const MorphologyConfig& morph);

struct BladeElementKinematics {
  Vec3 position = Vec3::Zero();   // quarter chord, inertial
  Vec3 velocity = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();    // wing-surface normal, inertial
  Vec3 span_axis = Vec3::UnitY(); // outboard, inertial
  Vec3 chord_axis = Vec3::UnitX();// leading to trailing edge, inertial
  Vec3 air = Vec3::Zero();        // relative air velocity, freestream - velocity
  double v_n = 0.0;  // normal component of relative air velocity, m/s
  double v_e = 0.0;  // chordwise component of relative air velocity, m/s
  double in_plane_speed = 0.0;  // |relative air velocity without its spanwise part|
};

/// Relative air velocity is freestream minus element velocity: v_n > 0 means
/// air crossing the wing from its lower surface (positive incidence).
BladeElementKinematics blade_element_kinematics(const ChainKinematics& chain,
                                                const BladeElement& element,
                                                const MorphologyConfig& morph,
                                                const Vec3& freestream = Vec3::Zero());

BladeElementKinematics blade_element_kinematics(const GeneralizedCoordinates& gc,
                                                const BladeElement& element,
                                                const MorphologyConfig& morph,
                                                const Vec3& freestream = Vec3::Zero());

/// Stick-figure polyline: body CoM, shoulder, elbow, wingtip (inertial).
std::array<Vec3, 4> wing_chain_points(const ChainKinematics& chain, Side side,
                                      const MorphologyConfig& morph);

}  // namespace aerobat
