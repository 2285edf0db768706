#include "imuteleop/session/archive.hpp"
#include "imuteleop/teleop/autopilot.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace imuteleop;
using nlohmann::json;

namespace {

ArchiveError::Kind error_kind(const std::string& text) {
  try {
    parse_archive(text);
  } catch (const ArchiveError& e) {
    return e.kind();
  }
  FAIL("parse did not throw");
  return {};
}

SessionArchive simulated_archive() {
  SessionConfig config;
  config.mapping = default_arm_mapping();
  DriftModel drift;
  drift.seed = 11;
  const ArmModel arm(0.30, 0.25);
  const auto steer = steer_along_wire(*config.wire, arm, config.mapping, {0.5, 3.0}, drift, 4.0, 100.0);
  const auto run = run_session(config, steer.measured, 4.0);
  SessionArchive a;
  a.metadata.created_at = "2026-01-01T00:00:00Z";
  a.metadata.seed = 11;
  a.metadata.wire_id = "straight";
  a.metadata.duration = 4.0;
  a.metadata.user = "User1";
  a.metadata.device = "IMU";
  a.metadata.config = session_config_to_json(config);
  a.metadata.generator = {{"drift", drift_to_json(drift)}};
  a.imu = steer.measured;
  a.trials.push_back(*run.record);
  a.summaries.push_back(summarize(*run.record));
  return a;
}

}  // namespace

TEST_CASE("golden archive text") {
  SessionArchive a;
  a.metadata.created_at = "2026-01-01T00:00:00Z";
  a.metadata.seed = 3;
  a.metadata.wire_id = "straight";
  a.metadata.duration = 1.5;
  a.metadata.user = "User1";
  a.metadata.device = "IMU";
  a.imu.push_back({0.25, UnitQuaterniond::Identity(), UnitQuaterniond(0.0, 0.0, 0.0, 1.0)});
  TrialSummary s;
  s.completion_time = 9.5;
  s.mean_position_error = 2.0;
  s.mean_orientation_error = 4.0;
  s.non_collision_pct = 100.0;
  s.completed = true;
  a.summaries.push_back(s);

  const std::string expected =
      R"({"format":"imuteleop-archive","metadata":{"config":null,"created_at":"2026-01-01T00:00:00Z",)"
      R"("device":"IMU","duration":1.5,"generator":null,"input_source":"imusim","seed":3,)"
      R"("user":"User1","wire_id":"straight"},"version":1})"
      "\n"
      R"({"r1":[1.0,0.0,0.0,0.0],"r2":[0.0,0.0,0.0,1.0],"t":0.25,"type":"imu"})"
      "\n"
      R"({"completed":true,"completion_time_s":9.5,"mean_ori_err_deg":4.0,"mean_pos_err_mm":2.0,)"
      R"("non_collision_pct":100.0,"type":"summary"})"
      "\n"
      R"({"imu":1,"summaries":1,"trials":0,"type":"end"})"
      "\n";
  CHECK(serialize_archive(a) == expected);
  CHECK(parse_archive(expected) == a);
}

TEST_CASE("round trip of a simulated session is exact") {
  const SessionArchive a = simulated_archive();
  REQUIRE(a.trials.size() == 1);
  const SessionArchive b = parse_archive(serialize_archive(a));
  CHECK(b == a);
  CHECK(b.metadata == a.metadata);
  CHECK(b.trials[0] == a.trials[0]);
  for (std::size_t k = 0; k < a.imu.size(); ++k) {
    CHECK(b.imu[k].r1.coeffs() == a.imu[k].r1.coeffs());
    CHECK(b.imu[k].t == a.imu[k].t);
  }

  const auto path = std::filesystem::temp_directory_path() / "imuteleop_archive_test.jsonl";
  record_archive(a, path);
  CHECK(load_archive(path) == a);
  std::filesystem::remove(path);
}

TEST_CASE("config snapshot round trip") {
  SessionConfig c;
  c.source = InputSource::datagram;
  c.wire = make_s_wire();
  c.arm = ArmModel(0.31, 0.27, 0.19);
  c.mapping = default_arm_mapping();
  c.mapping.scale = 1.5;
  c.loop_rate = 60.0;
  c.stale_after = 0.5;
  c.trial.start_margin = 0.02;
  const json j = session_config_to_json(c);
  const SessionConfig back = session_config_from_json(j);
  CHECK(back.source == c.source);
  CHECK(back.wire->id() == "s-shaped");
  CHECK(back.arm.hand() == 0.19);
  CHECK(back.mapping.scale == 1.5);
  CHECK(back.mapping.offset.translation == c.mapping.offset.translation);
  CHECK(back.loop_rate == 60.0);
  CHECK(back.trial.start_margin == 0.02);
  // A second pass is a fixed point.
  CHECK(session_config_to_json(back) == session_config_to_json(session_config_from_json(session_config_to_json(back))));

  c.wire.reset();
  CHECK_FALSE(session_config_from_json(session_config_to_json(c)).wire.has_value());
}

TEST_CASE("empty session gives a metadata-only archive") {
  SessionArchive a;
  a.metadata.wire_id = "straight";
  const std::string text = serialize_archive(a);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const SessionArchive b = parse_archive(text);
  CHECK(b.imu.empty());
  CHECK(b.trials.empty());
  CHECK(b.summaries.empty());
  CHECK(b.metadata.wire_id == "straight");
}

TEST_CASE("damaged archives") {
  using K = ArchiveError::Kind;
  const std::string text = serialize_archive(simulated_archive());

  // Cut mid-line and cut at a line boundary.
  CHECK(error_kind(text.substr(0, text.size() / 2)) == K::corrupt);
  const auto last_line = text.rfind('\n', text.size() - 2);
  CHECK(error_kind(text.substr(0, last_line + 1)) == K::corrupt);
  const auto second_line = text.find('\n') + 1;
  CHECK(error_kind(text.substr(0, second_line) + text.substr(text.find('\n', second_line) + 1)) == K::corrupt);

  CHECK(error_kind("") == K::corrupt);
  CHECK(error_kind("{}\n") == K::corrupt);
  CHECK(error_kind("not json\n") == K::corrupt);

  json header = json::parse(text.substr(0, text.find('\n')));
  header["version"] = 2;
  CHECK(error_kind(header.dump() + "\n") == K::version);

  CHECK(error_kind(text + R"({"type":"imu","t":9,"r1":[1,0,0,0],"r2":[1,0,0,0]})" + "\n") == K::corrupt);
  const std::string head = text.substr(0, text.find('\n') + 1);
  CHECK(error_kind(head + R"({"type":"video"})" + "\n") == K::corrupt);

  CHECK_THROWS_AS(load_archive("/nonexistent/dir/a.jsonl"), ArchiveError);
  try {
    load_archive("/nonexistent/dir/a.jsonl");
  } catch (const ArchiveError& e) {
    CHECK(e.kind() == K::io);
  }
}

TEST_CASE("imu stream dump") {
  const auto a = simulated_archive();
  const auto back = parse_imu_stream(serialize_imu_stream(a.imu));
  REQUIRE(back.size() == a.imu.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].t == a.imu[k].t);
    CHECK(back[k].r2.coeffs() == a.imu[k].r2.coeffs());
  }
}
