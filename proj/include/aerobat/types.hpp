#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <numbers>

namespace aerobat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat38 = Eigen::Matrix<double, 3, 8>;
using Mat28 = Eigen::Matrix<double, 2, 8>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kGravity = 9.81;
inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Layout of the generalized coordinate vector q = [p, theta, q_s, q_e].
namespace coord {
inline constexpr int kPx = 0;
inline constexpr int kPy = 1;
inline constexpr int kPz = 2;
inline constexpr int kRoll = 3;
inline constexpr int kPitch = 4;
inline constexpr int kYaw = 5;
inline constexpr int kShoulder = 6;
inline constexpr int kElbow = 7;
inline constexpr int kCount = 8;
}  // namespace coord

enum class Side { Left = 0, Right = 1 };

// The five rigid bodies of the reduced model.
enum class BodyId { Body = 0, LeftProximal, LeftDistal, RightProximal, RightDistal };
inline constexpr std::size_t kNumBodies = 5;

inline constexpr std::array<BodyId, kNumBodies> kAllBodies{
    BodyId::Body, BodyId::LeftProximal, BodyId::LeftDistal, BodyId::RightProximal,
    BodyId::RightDistal};

inline constexpr std::size_t index_of(BodyId id) { return static_cast<std::size_t>(id); }

inline constexpr bool is_wing(BodyId id) { return id != BodyId::Body; }
inline constexpr bool is_distal(BodyId id) {
  return id == BodyId::LeftDistal || id == BodyId::RightDistal;
}
inline constexpr Side side_of(BodyId id) {
  return (id == BodyId::RightProximal || id == BodyId::RightDistal) ? Side::Right : Side::Left;
}

/// A material point fixed in one of the bodies, given in that body's local frame.
struct BodyPoint {
  BodyId body = BodyId::Body;
  Vec3 local = Vec3::Zero();
};

/// An inertial-frame force applied at a material point.
struct AppliedForce {
  BodyPoint point;
  Vec3 force = Vec3::Zero();
};

}  // namespace aerobat
