#include "imuteleop/teleop/autopilot.hpp"
#include "imuteleop/teleop/session.hpp"

#include <doctest.h>

using namespace imuteleop;

namespace {

double mean_offset(const SteeringRun& run, const Wire& wire, const ArmModel& arm, const Mapping& m,
                   const AutopilotPlan& plan, double rate, bool measured) {
  double sum = 0.0;
  const auto& stream = measured ? run.measured : run.truth;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const Vector3d ring = apply_mapping(m, wrist_pose(arm, stream[k])).translation;
    const Vector3d intended = wire.at(autopilot_progress(wire, plan, k / rate)).point;
    sum += (ring - intended).norm();
  }
  return sum / static_cast<double>(stream.size());
}

}  // namespace

TEST_CASE("autopilot progress") {
  const Wire w = make_straight_wire();
  const AutopilotPlan plan{0.5, 10.0};
  CHECK(autopilot_progress(w, plan, 0.0) == 0.0);
  CHECK(autopilot_progress(w, plan, 0.5) == 0.0);
  CHECK(autopilot_progress(w, plan, 5.5) == doctest::Approx(0.2));
  CHECK(autopilot_progress(w, plan, 10.5) == w.length());
  CHECK(autopilot_progress(w, plan, 99.0) == w.length());
  CHECK_THROWS(autopilot_progress(w, {0.5, 0.0}, 1.0));
}

TEST_CASE("centerline ring stream has zero error") {
  for (const Wire& w : {make_straight_wire(), make_s_wire()}) {
    const auto stream = autopilot_ring_stream(w, {}, 11.0, 50.0);
    CHECK(stream.size() == 551);
    for (const auto& p : stream) {
      const auto m = evaluate(w, ring_at(p.pose));
      CHECK(m.position_error < 1e-12);
      CHECK(m.orientation_error < 1e-5);
      CHECK_FALSE(m.collision);
    }
    const auto r = run_trial(w, stream);
    CHECK(r.completed);
  }
}

TEST_CASE("default arm mapping") {
  const Mapping m = default_arm_mapping();
  CHECK(apply_mapping(m, {UnitQuaterniond::Identity(), kOperatorAnchor}).translation.norm() < 1e-15);
  const auto moved = [&](const Vector3d& d) {
    return apply_mapping(m, {UnitQuaterniond::Identity(), kOperatorAnchor + d}).translation;
  };
  CHECK((moved({0, -0.1, 0}) - Vector3d(0.1, 0, 0)).norm() < 1e-15);
  CHECK((moved({0.1, 0, 0}) - Vector3d(0, 0.1, 0)).norm() < 1e-15);
  CHECK((moved({0, 0, 0.1}) - Vector3d(0, 0, 0.1)).norm() < 1e-15);
}

TEST_CASE("steering without drift puts the mapped wrist on the wire") {
  const ArmModel arm(0.30, 0.25);
  const Mapping m = default_arm_mapping();
  const AutopilotPlan plan;
  for (const Wire& w : {make_straight_wire(), make_s_wire()}) {
    const auto run = steer_along_wire(w, arm, m, plan, DriftModel::none(), 11.0, 100.0);
    REQUIRE(run.truth.size() == 1101);
    for (std::size_t k = 0; k < run.truth.size(); ++k) {
      CHECK(run.truth[k].r1.coeffs() == run.measured[k].r1.coeffs());
      CHECK(run.truth[k].t == doctest::Approx(k / 100.0).epsilon(1e-15));
    }
    CHECK(mean_offset(run, w, arm, m, plan, 100.0, true) < 1e-12);

    SessionConfig config;
    config.wire = w;
    config.arm = arm;
    config.mapping = m;
    const auto session = run_session(config, run.measured, 11.0);
    REQUIRE(session.record.has_value());
    CHECK(session.record->completed);
    const auto s = summarize(*session.record);
    CHECK(s.mean_position_error < 1e-9);
    CHECK(s.non_collision_pct == 100.0);
  }
}

TEST_CASE("visual feedback pulls a drifting ring back toward the wire") {
  const ArmModel arm(0.30, 0.25);
  const Mapping m = default_arm_mapping();
  const Wire w = make_straight_wire();
  const AutopilotPlan plan{0.5, 59.0};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    DriftModel drift;
    drift.seed = seed;
    const auto open = steer_along_wire(w, arm, m, plan, drift, 60.0, 100.0);
    const auto closed = steer_along_wire(w, arm, m, plan, drift, 60.0, 100.0, 2.0);
    const double e_open = mean_offset(open, w, arm, m, plan, 100.0, true);
    const double e_closed = mean_offset(closed, w, arm, m, plan, 100.0, true);
    CHECK(e_closed < e_open);
    CHECK(e_closed < 0.0175);
    // Open loop: the true hand stays on the wire, the seen ring does not.
    CHECK(mean_offset(open, w, arm, m, plan, 100.0, false) < 1e-9);
  }
  CHECK_THROWS(steer_along_wire(w, arm, m, plan, DriftModel::none(), 1.0, 100.0, -1.0));
}
