#pragma once

// Four-thruster bang-bang attitude control.
//
// v1/v2 sit above/below the center of mass and push forward; v3/v4 sit above
// it and push to starboard/port. Per axis exactly one thruster is on:
//   v1 iff pitch > pitch_ref, otherwise v2;  v3 iff roll > roll_ref, otherwise v4.

#include "aerobat/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace aerobat::control {

struct AttitudeReference {
  double roll = 0.0;              // theta_x,ref, rad
  double pitch = deg2rad(20.0);   // theta_y,ref, rad

  bool operator==(const AttitudeReference&) const = default;
};

struct ThrusterCommand {
  std::array<bool, 4> on{false, false, false, false};

  bool v1() const { return on[0]; }
  bool v2() const { return on[1]; }
  bool v3() const { return on[2]; }
  bool v4() const { return on[3]; }
  /// Exactly one of {v1, v2} and one of {v3, v4}.
  bool exclusive() const { return (on[0] != on[1]) && (on[2] != on[3]); }
  bool operator==(const ThrusterCommand&) const = default;
};

ThrusterCommand bang_bang(double roll, double pitch, const AttitudeReference& ref);

struct Thruster {
  Vec3 position = Vec3::Zero();    // body frame, m
  Vec3 direction = Vec3::UnitX();  // unit force direction, body frame
  double magnitude = 0.0;          // force when on, N

  bool operator==(const Thruster&) const = default;
};

struct ThrusterLayout {
  std::array<Thruster, 4> thrusters;

  /// Throws ConfigError on non-unit directions or negative magnitudes.
  void validate() const;
  bool operator==(const ThrusterLayout&) const = default;
};

/// v1 (0.025, 0, 0.04) and v2 (0.025, 0, -0.04) push forward (-x);
/// v3, v4 at 2.5 cm above the CoM push to +y and -y. 0.04 N each.
ThrusterLayout default_layout(double magnitude = 0.04);

/// Inertial forces at the body-frame mount points; off thrusters give zero.
std::vector<AppliedForce> thruster_forces(const ThrusterCommand& cmd,
                                          const ThrusterLayout& layout, const Mat3& body_rotation);

/// Name used in files ("v1".."v4").
std::string thruster_name(std::size_t i);

}  // namespace aerobat::control
