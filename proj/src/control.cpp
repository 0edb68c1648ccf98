#include "aerobat/control.hpp"

#include "aerobat/errors.hpp"

#include <cmath>

namespace aerobat::control {

ThrusterCommand bang_bang(double roll, double pitch, const AttitudeReference& ref) {
  ThrusterCommand cmd;
  cmd.on[0] = pitch > ref.pitch;
  cmd.on[1] = !cmd.on[0];
  cmd.on[2] = roll > ref.roll;
  cmd.on[3] = !cmd.on[2];
  return cmd;
}

void ThrusterLayout::validate() const {
  for (std::size_t i = 0; i < thrusters.size(); ++i) {
    const Thruster& t = thrusters[i];
    if (!t.position.allFinite())
      throw ConfigError("thrusters." + thruster_name(i) + ": position must be finite");
    if (!t.direction.allFinite() || std::abs(t.direction.norm() - 1.0) > 1e-12)
      throw ConfigError("thrusters." + thruster_name(i) + ": direction must be a unit vector");
    if (!(t.magnitude >= 0.0) || !std::isfinite(t.magnitude))
      throw ConfigError("thrusters." + thruster_name(i) + ": magnitude must be >= 0");
  }
}

ThrusterLayout default_layout(double magnitude) {
  ThrusterLayout l;
  l.thrusters[0] = {Vec3(0.025, 0.0, 0.04), -Vec3::UnitX(), magnitude};
  l.thrusters[1] = {Vec3(0.025, 0.0, -0.04), -Vec3::UnitX(), magnitude};
  l.thrusters[2] = {Vec3(0.0, 0.0, 0.025), Vec3::UnitY(), magnitude};
  l.thrusters[3] = {Vec3(0.0, 0.0, 0.025), -Vec3::UnitY(), magnitude};
  return l;
}

std::vector<AppliedForce> thruster_forces(const ThrusterCommand& cmd,
                                          const ThrusterLayout& layout,
                                          const Mat3& body_rotation) {
  std::vector<AppliedForce> out(layout.thrusters.size());
  for (std::size_t i = 0; i < layout.thrusters.size(); ++i) {
    const Thruster& t = layout.thrusters[i];
    out[i].point = {BodyId::Body, t.position};
    if (cmd.on[i]) out[i].force = t.magnitude * (body_rotation * t.direction);
  }
  return out;
}

std::string thruster_name(std::size_t i) { return "v" + std::to_string(i + 1); }

}  // namespace aerobat::control
