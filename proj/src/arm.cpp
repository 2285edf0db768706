#include "imuteleop/arm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace imuteleop {

namespace {

void check_length(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    throw std::invalid_argument(std::string("ArmModel: ") + name +
                                " must be in (0, 1) m, got " + std::to_string(value));
  }
}

const Vector3d kSegmentAxis = Vector3d::UnitX();

}  // namespace

ArmModel::ArmModel(double upper, double forearm, double hand)
    : upper_(upper), forearm_(forearm), hand_(hand) {
  check_length(upper_, "upper-arm length");
  check_length(forearm_, "forearm length");
  check_length(hand_, "hand length");
}

double& JointConfig::operator[](int i) {
  switch (i) {
    case 0: return q1;
    case 1: return q2;
    case 2: return q3;
    case 3: return q4;
    case 4: return q5;
  }
  throw std::out_of_range("JointConfig index");
}

double JointConfig::operator[](int i) const {
  return const_cast<JointConfig&>(*this)[i];
}

bool in_range(const JointConfig& j) {
  for (int i = 0; i < 5; ++i) {
    if (!std::isfinite(j[i])) return false;
  }
  if (j.q4 < 0.0 || j.q4 > kElbowFlexionMax) return false;
  for (double q : {j.q1, j.q2, j.q3, j.q5}) {
    if (q < -kPi || q > kPi) return false;
  }
  return true;
}

void validate(const JointConfig& j) {
  if (!in_range(j)) {
    throw std::invalid_argument(
        "JointConfig out of range: elbow flexion must lie in [0, 150] deg and the "
        "other joints in [-180, 180] deg");
  }
}

ImuPair joints_to_imus(const JointConfig& j, double t) {
  validate(j);
  const UnitQuaterniond shoulder =
      multiply(multiply(rot_z(j.q1), rot_y(j.q2)), rot_x(j.q3));
  const UnitQuaterniond elbow = multiply(rot_z(j.q4), rot_x(j.q5));
  return {t, shoulder, multiply(shoulder, elbow)};
}

RigidTransformd wrist_pose(const ArmModel& arm, const ImuPair& imus) {
  // With R_s = R1 and R_e = R1^-1 R2 the chained product collapses to
  // p = R1 (l_u,0,0) + R2 (l_f,0,0), R = R2.
  RigidTransformd pose;
  pose.rotation = imus.r2.normalized();
  pose.translation = imus.r1 * (arm.upper() * kSegmentAxis) +
                     imus.r2 * (arm.forearm() * kSegmentAxis);
  return pose;
}

Vector3d fingertip_position(const ArmModel& arm, const ImuPair& imus) {
  return wrist_pose(arm, imus).translation + imus.r2 * (arm.hand() * kSegmentAxis);
}

ArmSkeleton arm_skeleton(const ArmModel& arm, const ImuPair& imus) {
  ArmSkeleton s;
  s.shoulder = Vector3d::Zero();
  s.elbow = imus.r1 * (arm.upper() * kSegmentAxis);
  s.wrist = s.elbow + imus.r2 * (arm.forearm() * kSegmentAxis);
  s.fingertip = s.wrist + imus.r2 * (arm.hand() * kSegmentAxis);
  return s;
}

JointConfig joints_reaching(double upper, double reach, const Vector3d& target,
                            double swivel, double pronation) {
  if (!(upper > 0.0 && reach > 0.0)) {
    throw std::invalid_argument("joints_reaching: link lengths must be positive");
  }
  const double min_flexed = std::sqrt(upper * upper + reach * reach +
                                      2.0 * upper * reach * std::cos(kElbowFlexionMax));
  const double dist = std::clamp(target.norm(), min_flexed, upper + reach);
  const double cos_elbow =
      std::clamp((dist * dist - upper * upper - reach * reach) / (2.0 * upper * reach), -1.0, 1.0);

  JointConfig j;
  j.q4 = std::min(std::acos(cos_elbow), kElbowFlexionMax);
  j.q5 = pronation;

  // Point reached in the upper-arm frame, then swing that frame onto the target.
  const Vector3d local = upper * Vector3d::UnitX() +
                         reach * Vector3d(std::cos(j.q4), std::sin(j.q4), 0.0);
  const Vector3d direction =
      target.norm() > 1e-12 ? Vector3d(target.normalized()) : Vector3d::UnitX();
  UnitQuaterniond swing;
  swing.setFromTwoVectors(local.normalized(), direction);
  const UnitQuaterniond shoulder =
      multiply(quat_from_axis_angle(direction, swivel), swing.normalized());

  // R = Rz(q1) Ry(q2) Rx(q3)
  const Matrix3d r = shoulder.toRotationMatrix();
  j.q2 = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  j.q1 = std::atan2(r(1, 0), r(0, 0));
  j.q3 = std::atan2(r(2, 1), r(2, 2));
  return j;
}

}  // namespace imuteleop
