#include "imuteleop/session/archive.hpp"

#include <fstream>
#include <sstream>

namespace imuteleop {

using nlohmann::json;

namespace {

json vec(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat(const UnitQuaterniond& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

Vector3d vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

UnitQuaterniond quat_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("expected [w, x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json transform(const RigidTransformd& t) { return {{"p", vec(t.translation)}, {"q", quat(t.rotation)}}; }

RigidTransformd transform_from(const json& j) {
  return {quat_from(j.at("q")), vec_from(j.at("p"))};
}

bool same(const ImuPair& a, const ImuPair& b) {
  return a.t == b.t && a.r1.coeffs() == b.r1.coeffs() && a.r2.coeffs() == b.r2.coeffs();
}

bool same(const TrialSummary& a, const TrialSummary& b) {
  return a.completion_time == b.completion_time && a.mean_position_error == b.mean_position_error &&
         a.mean_orientation_error == b.mean_orientation_error &&
         a.non_collision_pct == b.non_collision_pct && a.completed == b.completed;
}

}  // namespace

bool operator==(const SessionArchive& a, const SessionArchive& b) {
  if (!(a.metadata == b.metadata) || a.trials != b.trials) return false;
  if (a.imu.size() != b.imu.size() || a.summaries.size() != b.summaries.size()) return false;
  for (std::size_t k = 0; k < a.imu.size(); ++k) {
    if (!same(a.imu[k], b.imu[k])) return false;
  }
  for (std::size_t k = 0; k < a.summaries.size(); ++k) {
    if (!same(a.summaries[k], b.summaries[k])) return false;
  }
  return true;
}

json imu_record(const ImuPair& imus) {
  return {{"type", "imu"}, {"t", imus.t}, {"r1", quat(imus.r1)}, {"r2", quat(imus.r2)}};
}

ImuPair imu_from_record(const json& r) {
  return {r.at("t").get<double>(), quat_from(r.at("r1")), quat_from(r.at("r2"))};
}

// Samples are packed as flat arrays:
// [t, p(3), q(4), wire_point(3), wire_tangent(3), pos_err, ori_err, collision, s]
json trial_record(const TrialRecord& trial) {
  json samples = json::array();
  for (const auto& s : trial.samples) {
    const auto& p = s.ring_pose.translation;
    const auto& q = s.ring_pose.rotation;
    samples.push_back(json::array({s.t, p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z(),
                                   s.wire_point.x(), s.wire_point.y(), s.wire_point.z(),
                                   s.wire_tangent.x(), s.wire_tangent.y(), s.wire_tangent.z(),
                                   s.position_error, s.orientation_error, s.collision ? 1 : 0,
                                   s.s}));
  }
  return {{"type", "trial"},
          {"wire_id", trial.wire_id},
          {"completed", trial.completed},
          {"samples", samples}};
}

TrialRecord trial_from_record(const json& r) {
  TrialRecord trial;
  trial.wire_id = r.at("wire_id").get<std::string>();
  trial.completed = r.at("completed").get<bool>();
  for (const auto& a : r.at("samples")) {
    if (!a.is_array() || a.size() != 18) throw std::invalid_argument("trial sample must have 18 fields");
    const auto d = [&](int i) { return a[static_cast<std::size_t>(i)].get<double>(); };
    TrialSample s;
    s.t = d(0);
    s.ring_pose.translation = {d(1), d(2), d(3)};
    s.ring_pose.rotation = UnitQuaterniond(d(4), d(5), d(6), d(7));
    s.wire_point = {d(8), d(9), d(10)};
    s.wire_tangent = {d(11), d(12), d(13)};
    s.position_error = d(14);
    s.orientation_error = d(15);
    s.collision = a[16].get<int>() != 0;
    s.s = d(17);
    trial.samples.push_back(s);
  }
  return trial;
}

json summary_record(const TrialSummary& s) {
  return {{"type", "summary"},
          {"completion_time_s", s.completion_time},
          {"mean_pos_err_mm", s.mean_position_error},
          {"mean_ori_err_deg", s.mean_orientation_error},
          {"non_collision_pct", s.non_collision_pct},
          {"completed", s.completed}};
}

TrialSummary summary_from_record(const json& r) {
  TrialSummary s;
  s.completion_time = r.at("completion_time_s").get<double>();
  s.mean_position_error = r.at("mean_pos_err_mm").get<double>();
  s.mean_orientation_error = r.at("mean_ori_err_deg").get<double>();
  s.non_collision_pct = r.at("non_collision_pct").get<double>();
  s.completed = r.at("completed").get<bool>();
  return s;
}

json session_config_to_json(const SessionConfig& c) {
  json j = {{"source", to_string(c.source)},
            {"arm", {{"upper", c.arm.upper()}, {"forearm", c.arm.forearm()}, {"hand", c.arm.hand()}}},
            {"mapping",
             {{"scale", c.mapping.scale},
              {"offset", transform(c.mapping.offset)},
              {"rebase", transform(c.mapping.rebase)}}},
            {"trial",
             {{"start_margin", c.trial.start_margin},
              {"end_margin", c.trial.end_margin},
              {"ring_inner_radius", c.trial.ring_shape.inner_radius},
              {"ring_outer_radius", c.trial.ring_shape.outer_radius}}},
            {"loop_rate", c.loop_rate},
            {"stale_after", c.stale_after}};
  j["wire"] = c.wire ? json::parse(format_wire(*c.wire)) : json(nullptr);
  return j;
}

SessionConfig session_config_from_json(const json& j) {
  SessionConfig c;
  c.source = input_source_from_string(j.at("source").get<std::string>());
  const auto& arm = j.at("arm");
  c.arm = ArmModel(arm.at("upper").get<double>(), arm.at("forearm").get<double>(),
                   arm.at("hand").get<double>());
  const auto& m = j.at("mapping");
  c.mapping.scale = m.at("scale").get<double>();
  c.mapping.offset = transform_from(m.at("offset"));
  c.mapping.rebase = transform_from(m.at("rebase"));
  const auto& t = j.at("trial");
  c.trial.start_margin = t.at("start_margin").get<double>();
  c.trial.end_margin = t.at("end_margin").get<double>();
  c.trial.ring_shape.inner_radius = t.at("ring_inner_radius").get<double>();
  c.trial.ring_shape.outer_radius = t.at("ring_outer_radius").get<double>();
  c.loop_rate = j.at("loop_rate").get<double>();
  c.stale_after = j.at("stale_after").get<double>();
  const auto& wire = j.at("wire");
  if (wire.is_null()) {
    c.wire.reset();
  } else {
    c.wire = parse_wire(wire.dump());
  }
  validate(c);
  return c;
}

json drift_to_json(const DriftModel& m) {
  return {{"bias_rw_sigma", m.bias_rw_sigma},
          {"noise_sigma", m.noise_sigma},
          {"initial_bias", vec(m.initial_bias)},
          {"seed", m.seed}};
}

std::string serialize_archive(const SessionArchive& a) {
  const auto& m = a.metadata;
  json header = {{"format", kArchiveFormat},
                 {"version", kArchiveVersion},
                 {"metadata",
                  {{"created_at", m.created_at},
                   {"seed", m.seed},
                   {"wire_id", m.wire_id},
                   {"input_source", m.input_source},
                   {"duration", m.duration},
                   {"user", m.user},
                   {"device", m.device},
                   {"config", m.config},
                   {"generator", m.generator}}}};
  std::string out = header.dump() + "\n";
  for (const auto& s : a.imu) out += imu_record(s).dump() + "\n";
  for (const auto& t : a.trials) out += trial_record(t).dump() + "\n";
  for (const auto& s : a.summaries) out += summary_record(s).dump() + "\n";
  const json footer = {{"type", "end"},
                       {"imu", a.imu.size()},
                       {"trials", a.trials.size()},
                       {"summaries", a.summaries.size()}};
  out += footer.dump() + "\n";
  return out;
}

SessionArchive parse_archive(const std::string& text) {
  using Kind = ArchiveError::Kind;
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line)) throw ArchiveError(Kind::corrupt, "archive is empty");
  SessionArchive a;
  int line_no = 1;
  try {
    const json header = json::parse(line);
    if (header.value("format", std::string()) != kArchiveFormat) {
      throw ArchiveError(Kind::corrupt, "not a session archive");
    }
    const int version = header.at("version").get<int>();
    if (version != kArchiveVersion) {
      throw ArchiveError(Kind::version,
                         "unsupported archive version " + std::to_string(version));
    }
    const auto& m = header.at("metadata");
    a.metadata.created_at = m.at("created_at").get<std::string>();
    a.metadata.seed = m.at("seed").get<std::uint64_t>();
    a.metadata.wire_id = m.at("wire_id").get<std::string>();
    a.metadata.input_source = m.at("input_source").get<std::string>();
    a.metadata.duration = m.at("duration").get<double>();
    a.metadata.user = m.at("user").get<std::string>();
    a.metadata.device = m.at("device").get<std::string>();
    a.metadata.config = m.at("config");
    a.metadata.generator = m.at("generator");

    bool ended = false;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (ended) throw ArchiveError(Kind::corrupt, "records after the end marker");
      const json r = json::parse(line);
      const auto type = r.at("type").get<std::string>();
      if (type == "end") {
        if (r.at("imu").get<std::size_t>() != a.imu.size() ||
            r.at("trials").get<std::size_t>() != a.trials.size() ||
            r.at("summaries").get<std::size_t>() != a.summaries.size()) {
          throw ArchiveError(Kind::corrupt, "record counts do not match the end marker");
        }
        ended = true;
      } else if (type == "imu") {
        a.imu.push_back(imu_from_record(r));
      } else if (type == "trial") {
        a.trials.push_back(trial_from_record(r));
      } else if (type == "summary") {
        a.summaries.push_back(summary_from_record(r));
      } else {
        throw ArchiveError(Kind::corrupt, "unknown record type '" + type + "'");
      }
    }
    if (!ended) throw ArchiveError(Kind::corrupt, "archive is truncated (no end marker)");
  } catch (const ArchiveError&) {
    throw;
  } catch (const std::exception& e) {
    throw ArchiveError(Kind::corrupt,
                       "corrupt archive at line " + std::to_string(line_no) + ": " + e.what());
  }
  return a;
}

void record_archive(const SessionArchive& archive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArchiveError(ArchiveError::Kind::io, "cannot write " + path.string());
  out << serialize_archive(archive);
  if (!out) throw ArchiveError(ArchiveError::Kind::io, "write failed for " + path.string());
}

SessionArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError(ArchiveError::Kind::io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_archive(buf.str());
}

std::string serialize_imu_stream(const std::vector<ImuPair>& stream) {
  std::string out;
  for (const auto& s : stream) out += imu_record(s).dump() + "\n";
  return out;
}

std::vector<ImuPair> parse_imu_stream(const std::string& text) {
  std::vector<ImuPair> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    out.push_back(imu_from_record(json::parse(line)));
  }
  return out;
}

}  // namespace imuteleop
