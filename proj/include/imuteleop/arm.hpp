// Simplified ball-joint arm: 3-dof shoulder at the world origin, 2-dof elbow,
// rigid upper-arm, forearm and hand links along each segment's local +x.
//
// World frame: x forward along the extended arm, y left, z up.
#pragma once

#include "imuteleop/geom.hpp"

namespace imuteleop {

constexpr double kDefaultHandLength = 0.2;

class ArmModel {
 public:
  /// Throws std::invalid_argument unless every length is in (0, 1) m.
  ArmModel(double upper, double forearm, double hand = kDefaultHandLength);

  double upper() const { return upper_; }
  double forearm() const { return forearm_; }
  double hand() const { return hand_; }

 private:
  double upper_;
  double forearm_;
  double hand_;
};

/// Shoulder abduction/adduction, flexion/extension, medial/lateral rotation,
/// elbow flexion/extension and forearm pronation/supination, in radians.
struct JointConfig {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double q4 = 0.0;
  double q5 = 0.0;

  double& operator[](int i);
  double operator[](int i) const;
  friend bool operator==(const JointConfig&, const JointConfig&) = default;
};

constexpr double kElbowFlexionMax = deg2rad(150.0);

bool in_range(const JointConfig& j);
void validate(const JointConfig& j);

/// Fused orientations of the upper-arm (r1) and forearm (r2) sensors.
struct ImuPair {
  double t = 0.0;
  UnitQuaterniond r1 = UnitQuaterniond::Identity();
  UnitQuaterniond r2 = UnitQuaterniond::Identity();
};

/// r1 = Rz(q1) Ry(q2) Rx(q3); r2 = r1 Rz(q4) Rx(q5). Rejects out-of-range joints.
ImuPair joints_to_imus(const JointConfig& j, double t = 0.0);

/// Wrist frame from the two sensor orientations: the chained frame product
/// F[R1, 0] F[R1^-1 R2, (l_u,0,0)] F[I, (l_f,0,0)].
RigidTransformd wrist_pose(const ArmModel& arm, const ImuPair& imus);

/// Wrist frame extended by the hand link, hand rotation fixed at identity.
Vector3d fingertip_position(const ArmModel& arm, const ImuPair& imus);

struct ArmSkeleton {
  Vector3d shoulder;
  Vector3d elbow;
  Vector3d wrist;
  Vector3d fingertip;
};

ArmSkeleton arm_skeleton(const ArmModel& arm, const ImuPair& imus);

/// Joint angles that put the point at `reach` along the forearm direction
/// (measured from the elbow) on `target`. `swivel` turns the elbow about the
/// shoulder-target line; `pronation` is passed through as q5. Targets beyond
/// the arm's reach are clamped to the boundary of the reachable shell.
/// Used by the synthetic generators (sensor simulator, calibration touches).
JointConfig joints_reaching(double upper, double reach, const Vector3d& target,
                            double swivel = 0.0, double pronation = 0.0);

}  // namespace imuteleop
