#include "imuteleop/teleop/autopilot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imuteleop {

double autopilot_progress(const Wire& wire, const AutopilotPlan& plan, double t) {
  if (!(plan.traverse > 0.0)) throw std::invalid_argument("autopilot: traverse time must be positive");
  const double u = std::clamp((t - plan.hold) / plan.traverse, 0.0, 1.0);
  return u * wire.length();
}

RigidTransformd centerline_pose(const Wire& wire, double s) {
  const CenterlinePoint c = wire.at(s);
  UnitQuaterniond q;
  q.setFromTwoVectors(Vector3d::UnitX(), c.tangent);
  return {q.normalized(), c.point};
}

std::vector<TimedPose> autopilot_ring_stream(const Wire& wire, const AutopilotPlan& plan,
                                             double duration, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("autopilot: rate must be positive");
  const auto count = static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
  std::vector<TimedPose> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / rate;
    out.push_back({t, centerline_pose(wire, autopilot_progress(wire, plan, t))});
  }
  return out;
}

Mapping default_arm_mapping() {
  Mapping m;
  m.offset.rotation = rot_z(kPi / 2);
  m.offset.translation = -(m.offset.rotation * kOperatorAnchor);
  return m;
}

SteeringRun steer_along_wire(const Wire& wire, const ArmModel& arm, const Mapping& mapping,
                             const AutopilotPlan& plan, const DriftModel& drift,
                             double duration, double rate, double feedback_gain) {
  if (!(feedback_gain >= 0.0)) throw std::invalid_argument("steering: negative feedback gain");
  validate(mapping);
  ImuCorruptor corruptor(drift, rate);
  const double dt = 1.0 / rate;
  const auto count = static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;

  // Rotation taking task-frame offsets back into the arm frame.
  const UnitQuaterniond to_arm =
      compose(mapping.rebase, mapping.offset).rotation.conjugate().normalized();

  SteeringRun run;
  run.truth.reserve(count);
  run.measured.reserve(count);
  Vector3d correction = Vector3d::Zero();
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / rate;
    const Vector3d intended = wire.at(autopilot_progress(wire, plan, t)).point;
    const Vector3d hand = invert_mapping(mapping, {UnitQuaterniond::Identity(), intended}).translation;
    const JointConfig joints =
        joints_reaching(arm.upper(), arm.forearm(), hand + correction, plan.swivel);
    const ImuPair truth = joints_to_imus(joints, t);
    const ImuPair measured = corruptor.step(truth);
    run.truth.push_back(truth);
    run.measured.push_back(measured);

    if (feedback_gain > 0.0) {
      const Vector3d seen = apply_mapping(mapping, wrist_pose(arm, measured)).translation;
      correction -= feedback_gain * dt * (to_arm * (seen - intended)) / mapping.scale;
    }
  }
  return run;
}

}  // namespace imuteleop
