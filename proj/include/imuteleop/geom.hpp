// Rotation and rigid-transform algebra.
//
// Quaternions are Eigen::Quaternion values kept at unit norm; every
// operation that produces a rotation renormalizes. Component order on any
// serialized surface is (w, x, y, z).
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace imuteleop {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
using UnitQuaternion = Eigen::Quaternion<Scalar>;

using Vector3d = Vector3<double>;
using Matrix3d = Matrix3<double>;
using UnitQuaterniond = UnitQuaternion<double>;

/// Frame F[R, p]: rotation followed by translation, p in meters.
template <typename Scalar>
struct RigidTransform {
  UnitQuaternion<Scalar> rotation = UnitQuaternion<Scalar>::Identity();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();

  static RigidTransform Identity() { return {}; }

  Vector3<Scalar> operator*(const Vector3<Scalar>& point) const {
    return rotation * point + translation;
  }

  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
    m.template topLeftCorner<3, 3>() = rotation.toRotationMatrix();
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }
};

using RigidTransformd = RigidTransform<double>;

template <typename Scalar>
UnitQuaternion<Scalar> normalized(const UnitQuaternion<Scalar>& q) {
  return q.normalized();
}

/// a ∘ b, renormalized.
template <typename Scalar>
UnitQuaternion<Scalar> multiply(const UnitQuaternion<Scalar>& a,
                                const UnitQuaternion<Scalar>& b) {
  return (a * b).normalized();
}

template <typename Scalar>
Vector3<Scalar> rotate_vector(const UnitQuaternion<Scalar>& q, const Vector3<Scalar>& v) {
  return q * v;
}

template <typename Scalar>
UnitQuaternion<Scalar> quat_from_axis_angle(const Vector3<Scalar>& axis, Scalar angle) {
  const Scalar n = axis.norm();
  if (!(n > Scalar(1e-12))) {
    throw std::invalid_argument("quat_from_axis_angle: rotation axis has zero length");
  }
  const Scalar half = angle / Scalar(2);
  const Vector3<Scalar> xyz = (std::sin(half) / n) * axis;
  return UnitQuaternion<Scalar>(std::cos(half), xyz.x(), xyz.y(), xyz.z()).normalized();
}

template <typename Scalar>
UnitQuaternion<Scalar> rot_x(Scalar angle) {
  return quat_from_axis_angle<Scalar>(Vector3<Scalar>::UnitX(), angle);
}

template <typename Scalar>
UnitQuaternion<Scalar> rot_y(Scalar angle) {
  return quat_from_axis_angle<Scalar>(Vector3<Scalar>::UnitY(), angle);
}

template <typename Scalar>
UnitQuaternion<Scalar> rot_z(Scalar angle) {
  return quat_from_axis_angle<Scalar>(Vector3<Scalar>::UnitZ(), angle);
}

/// Rotation by the rotation vector `v` (axis * angle); zero maps to identity.
template <typename Scalar>
UnitQuaternion<Scalar> quat_from_rotation_vector(const Vector3<Scalar>& v) {
  const Scalar angle = v.norm();
  if (angle == Scalar(0)) return UnitQuaternion<Scalar>::Identity();
  return quat_from_axis_angle<Scalar>(v, angle);
}

/// Geodesic distance on SO(3), in [0, pi]. Invariant under q -> -q.
template <typename Scalar>
Scalar angle_between(const UnitQuaternion<Scalar>& a, const UnitQuaternion<Scalar>& b) {
  const UnitQuaternion<Scalar> d = a.conjugate() * b;
  return Scalar(2) * std::atan2(d.vec().norm(), std::abs(d.w()));
}

template <typename Scalar>
RigidTransform<Scalar> make_transform(const UnitQuaternion<Scalar>& rotation,
                                      const Vector3<Scalar>& translation) {
  return {rotation.normalized(), translation};
}

template <typename Scalar>
RigidTransform<Scalar> translation(Scalar x, Scalar y, Scalar z) {
  return {UnitQuaternion<Scalar>::Identity(), Vector3<Scalar>(x, y, z)};
}

template <typename Scalar>
RigidTransform<Scalar> compose(const RigidTransform<Scalar>& a, const RigidTransform<Scalar>& b) {
  return {multiply(a.rotation, b.rotation), a.rotation * b.translation + a.translation};
}

template <typename Scalar>
RigidTransform<Scalar> inverse(const RigidTransform<Scalar>& t) {
  const UnitQuaternion<Scalar> inv = t.rotation.conjugate().normalized();
  return {inv, -(inv * t.translation)};
}

/// Right-handed <-> left-handed bridge: mirror through the z = 0 plane.
/// Position z is negated; the rotation is conjugated by diag(1, 1, -1),
/// which negates the quaternion x and y components. Involutive and exact.
template <typename Scalar>
std::pair<Vector3<Scalar>, UnitQuaternion<Scalar>> handedness_convert(
    const Vector3<Scalar>& p, const UnitQuaternion<Scalar>& q) {
  return {Vector3<Scalar>(p.x(), p.y(), -p.z()),
          UnitQuaternion<Scalar>(q.w(), -q.x(), -q.y(), q.z())};
}

template <typename Scalar>
RigidTransform<Scalar> handedness_convert(const RigidTransform<Scalar>& t) {
  auto [p, q] = handedness_convert(t.translation, t.rotation);
  return {q, p};
}

template <typename Scalar>
bool is_finite(const Vector3<Scalar>& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace imuteleop
