#include "imuteleop/teleop/ui_protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace imuteleop {

using nlohmann::json;

namespace {

json vec(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat(const UnitQuaterniond& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

template <std::size_t N>
std::array<double, N> numbers(const json& msg, const char* key) {
  const auto it = msg.find(key);
  if (it == msg.end() || !it->is_array() || it->size() != N) {
    throw std::invalid_argument(std::string("control message: '") + key + "' must be an array of " +
                                std::to_string(N) + " numbers");
  }
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) {
    if (!(*it)[i].is_number()) {
      throw std::invalid_argument(std::string("control message: '") + key + "' must be numeric");
    }
    out[i] = (*it)[i].get<double>();
    if (!std::isfinite(out[i])) throw std::invalid_argument("control message: non-finite value");
  }
  return out;
}

}  // namespace

json scene_message(const SessionConfig& config) {
  json msg = {{"type", "scene"},
              {"ring",
               {{"inner_radius", config.trial.ring_shape.inner_radius},
                {"outer_radius", config.trial.ring_shape.outer_radius}}}};
  if (config.wire) {
    const Wire& wire = *config.wire;
    json points = json::array();
    const int n = 200;
    for (int k = 0; k <= n; ++k) points.push_back(vec(wire.at(wire.length() * k / n).point));
    msg["wire"] = {{"id", wire.id()},
                   {"tube_radius", wire.tube_radius()},
                   {"length", wire.length()},
                   {"points", points}};
    msg["threshold_mm"] = collision_threshold_mm(wire, config.trial.ring_shape);
  } else {
    msg["wire"] = nullptr;
    msg["threshold_mm"] = nullptr;
  }
  return msg;
}

json summary_json(const TrialSummary& s) {
  return {{"completion_time_s", s.completion_time},
          {"mean_pos_err_mm", s.mean_position_error},
          {"mean_ori_err_deg", s.mean_orientation_error},
          {"non_collision_pct", s.non_collision_pct},
          {"completed", s.completed}};
}

json state_message(const SessionState& state, const SessionConfig& config,
                   const std::optional<TrialSummary>& summary) {
  json msg = {{"type", "state"},
              {"t", state.t},
              {"source", to_string(state.source)},
              {"ring", {{"p", vec(state.ring.translation)}, {"q", quat(state.ring.rotation)}}},
              {"clutch", state.clutch},
              {"stale", state.stale},
              {"trial",
               {{"phase", to_string(state.phase)},
                {"elapsed_s", state.elapsed},
                {"progress_s", state.progress}}}};
  if (state.arm) {
    msg["arm"] = {{"shoulder", vec(state.arm->shoulder)},
                  {"elbow", vec(state.arm->elbow)},
                  {"wrist", vec(state.arm->wrist)},
                  {"fingertip", vec(state.arm->fingertip)}};
  } else {
    msg["arm"] = nullptr;
  }
  if (state.metrics && config.wire) {
    msg["pos_err_mm"] = 1000.0 * state.metrics->position_error;
    msg["ori_err_deg"] = state.metrics->orientation_error;
    msg["collision"] = state.metrics->collision;
    msg["threshold_mm"] = collision_threshold_mm(*config.wire, config.trial.ring_shape);
  } else {
    msg["pos_err_mm"] = nullptr;
    msg["ori_err_deg"] = nullptr;
    msg["collision"] = nullptr;
    msg["threshold_mm"] = nullptr;
  }
  msg["summary"] = summary ? summary_json(*summary) : json(nullptr);
  return msg;
}

ControlMessage parse_control_message(const std::string& text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("control message: ") + e.what());
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    throw std::invalid_argument("control message: missing 'type'");
  }
  const auto type = msg["type"].get<std::string>();
  if (type == "start") return Command{Command::Type::start};
  if (type == "stop") return Command{Command::Type::stop};
  if (type == "clutch") {
    if (!msg.contains("engaged") || !msg["engaged"].is_boolean()) {
      throw std::invalid_argument("control message: clutch needs boolean 'engaged'");
    }
    return Command{Command::Type::clutch, msg["engaged"].get<bool>()};
  }
  if (type == "input_pose") {
    const auto p = numbers<3>(msg, "p");
    const auto q = numbers<4>(msg, "q");
    const UnitQuaterniond rot(q[0], q[1], q[2], q[3]);
    if (!(std::abs(rot.norm() - 1.0) < 1e-6)) {
      throw std::invalid_argument("control message: quaternion is not unit");
    }
    return InputPoseMessage{{rot, Vector3d(p[0], p[1], p[2])}};
  }
  if (type == "input_joints") {
    const auto q = numbers<5>(msg, "q");
    JointConfig j{q[0], q[1], q[2], q[3], q[4]};
    if (!in_range(j)) throw std::invalid_argument("control message: joints out of range");
    return InputJointsMessage{j};
  }
  throw std::invalid_argument("control message: unknown type '" + type + "'");
}

}  // namespace imuteleop
