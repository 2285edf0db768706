// Scripted operators for simulated sessions: a ring that slides along the
// wire centerline, and an arm whose wrist is steered so the mapped ring
// follows the wire, optionally closing a visual-feedback loop on the
// drifting sensor measurements.
#pragma once

#include "imuteleop/arm.hpp"
#include "imuteleop/imusim.hpp"
#include "imuteleop/task.hpp"
#include "imuteleop/teleop/mapping.hpp"

#include <vector>

namespace imuteleop {

struct AutopilotPlan {
  double hold = 0.5;        ///< seconds at the wire start before moving
  double traverse = 10.0;   ///< seconds to travel the full wire
  double swivel = 0.0;      ///< elbow swivel of the steering arm, radians
};

/// Arclength commanded at time t.
double autopilot_progress(const Wire& wire, const AutopilotPlan& plan, double t);

/// Ring pose on the centerline at arclength s, axis along the tangent.
RigidTransformd centerline_pose(const Wire& wire, double s);

std::vector<TimedPose> autopilot_ring_stream(const Wire& wire, const AutopilotPlan& plan,
                                             double duration, double rate);

/// Arm-frame anchor that maps to the task origin under the default mapping.
inline const Vector3d kOperatorAnchor{0.35, 0.0, -0.10};

/// Task frame seen by an operator facing the wire: hand right (-y) moves the
/// ring +x, forward (+x) moves it +y, up stays up. kOperatorAnchor maps to
/// the task origin.
Mapping default_arm_mapping();

struct SteeringRun {
  std::vector<ImuPair> truth;     ///< sensor orientations of the real arm
  std::vector<ImuPair> measured;  ///< after the drift model
};

/// Steers the arm along the wire at the sensor rate. With feedback_gain > 0
/// the operator integrates the visible ring offset (measured ring minus the
/// intended ring position) into a hand correction at that gain, in 1/s.
SteeringRun steer_along_wire(const Wire& wire, const ArmModel& arm, const Mapping& mapping,
                             const AutopilotPlan& plan, const DriftModel& drift,
                             double duration, double rate, double feedback_gain = 0.0);

}  // namespace imuteleop
