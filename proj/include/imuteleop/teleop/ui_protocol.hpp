// JSON messages exchanged with the browser UI over the WebSocket bridge.
//
// Outbound:
//   {"type":"scene", "wire":{"id", "tube_radius", "length", "points":[[x,y,z],...]},
//    "ring":{"inner_radius","outer_radius"}, "threshold_mm"}            (on connect)
//   {"type":"state", "t", "ring":{"p":[3],"q":[w,x,y,z]},
//    "arm":{"shoulder","elbow","wrist","fingertip"} | null,
//    "pos_err_mm", "ori_err_deg", "collision", "threshold_mm",
//    "clutch", "stale", "source",
//    "trial":{"phase","elapsed_s","progress_s"}, "summary":{...} | null}
// Inbound:
//   {"type":"start"} {"type":"stop"} {"type":"clutch","engaged":bool}
//   {"type":"input_pose","p":[3],"q":[w,x,y,z]} {"type":"input_joints","q":[5]}  (radians)
#pragma once

#include "imuteleop/teleop/session.hpp"

#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

namespace imuteleop {

nlohmann::json scene_message(const SessionConfig& config);

nlohmann::json state_message(const SessionState& state, const SessionConfig& config,
                             const std::optional<TrialSummary>& summary);

nlohmann::json summary_json(const TrialSummary& s);

struct InputPoseMessage {
  RigidTransformd pose;
};

struct InputJointsMessage {
  JointConfig joints;
};

using ControlMessage = std::variant<Command, InputPoseMessage, InputJointsMessage>;

/// Throws std::invalid_argument on malformed JSON or unknown message types.
ControlMessage parse_control_message(const std::string& text);

}  // namespace imuteleop
