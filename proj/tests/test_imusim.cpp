#include "imuteleop/imusim.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace imuteleop;

namespace {

Trajectory reach_and_back() {
  Trajectory t;
  JointConfig out;
  out.q1 = deg2rad(20);
  out.q2 = deg2rad(-10);
  out.q4 = deg2rad(60);
  t.segments.push_back({2.0, out, Interpolation::linear});
  t.segments.push_back({1.0, out, Interpolation::hold});
  t.segments.push_back({2.0, JointConfig{}, Interpolation::sinusoid});
  return t;
}

Trajectory still(double seconds) {
  Trajectory t;
  t.segments.push_back({seconds, JointConfig{}, Interpolation::hold});
  return t;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = oracle::mean(ra), mb = oracle::mean(rb);
  double num = 0, da = 0, db = 0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    num += (ra[k] - ma) * (rb[k] - mb);
    da += (ra[k] - ma) * (ra[k] - ma);
    db += (rb[k] - mb) * (rb[k] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("trajectory sampling") {
  const Trajectory t = reach_and_back();
  CHECK(t.duration() == 5.0);
  CHECK(sample_trajectory(t, 0.0).q4 == 0.0);
  CHECK(sample_trajectory(t, 1.0).q4 == doctest::Approx(deg2rad(30)).epsilon(1e-14));
  CHECK(sample_trajectory(t, 2.0).q4 == deg2rad(60));
  CHECK(sample_trajectory(t, 2.5).q1 == deg2rad(20));
  CHECK(sample_trajectory(t, 4.0).q4 == doctest::Approx(deg2rad(30)).epsilon(1e-14));
  CHECK(sample_trajectory(t, 5.0).q4 == 0.0);
  CHECK_THROWS_AS(sample_trajectory(t, -0.1), std::out_of_range);
  CHECK_THROWS_AS(sample_trajectory(t, 5.1), std::out_of_range);

  Trajectory bad;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad.segments.push_back({0.0, JointConfig{}, Interpolation::linear});
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("ground-truth stream timing and content") {
  const Trajectory t = reach_and_back();
  const auto s = ground_truth_stream(t, 100.0);
  CHECK(s.size() == 501);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s[k].t == static_cast<double>(k) / 100.0);
    const auto ref = joints_to_imus(sample_trajectory(t, s[k].t));
    CHECK(s[k].r1.coeffs() == ref.r1.coeffs());
    CHECK(s[k].r2.coeffs() == ref.r2.coeffs());
  }
  CHECK(ground_truth_stream(t, 10.0).size() == 51);
  CHECK_THROWS_AS(ground_truth_stream(t, 9.0), std::invalid_argument);
  CHECK_THROWS_AS(ground_truth_stream(t, 401.0), std::invalid_argument);
}

TEST_CASE("zero drift passes truth through exactly") {
  const Trajectory t = reach_and_back();
  const auto truth = ground_truth_stream(t, 100.0);
  const auto out = stream(t, DriftModel::none(), 100.0);
  REQUIRE(out.size() == truth.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    CHECK(out[k].r1.coeffs() == truth[k].r1.coeffs());
    CHECK(out[k].r2.coeffs() == truth[k].r2.coeffs());
  }
  const auto d = drift_angle(out, truth);
  CHECK(*std::max_element(d.upper.begin(), d.upper.end()) == 0.0);
}

TEST_CASE("fixed seed gives an identical stream; seeds and sensors differ") {
  DriftModel m;
  m.seed = 42;
  const Trajectory t = reach_and_back();
  const auto a = stream(t, m, 100.0), b = stream(t, m, 100.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].r1.coeffs() == b[k].r1.coeffs());
    CHECK(a[k].r2.coeffs() == b[k].r2.coeffs());
  }
  m.seed = 43;
  const auto c = stream(t, m, 100.0);
  CHECK(a.back().r1.coeffs() != c.back().r1.coeffs());

  // Same truth for both sensors: independent substreams still diverge.
  const auto d = drift_angle(stream(still(5.0), m, 100.0), ground_truth_stream(still(5.0), 100.0));
  CHECK(d.upper.back() != d.forearm.back());
}

TEST_CASE("constant bias integrates to bias times time") {
  DriftModel m = DriftModel::none();
  m.initial_bias = Vector3d(0.01, 0.0, 0.0);
  const auto truth = ground_truth_stream(still(10.0), 100.0);
  const auto out = corrupt(truth, m, 100.0);
  const auto d = drift_angle(out, truth);
  CHECK(std::abs(d.upper.back() - 0.1) < 1e-6);
  CHECK(std::abs(d.forearm.back() - 0.1) < 1e-6);
  CHECK(std::abs(d.upper[500] - 0.05) < 1e-6);
  // Error is about world x.
  const UnitQuaterniond err = multiply(out.back().r1, truth.back().r1.conjugate());
  CHECK(std::abs(err.y()) < 1e-15);
  CHECK(std::abs(err.z()) < 1e-15);
}

TEST_CASE("white noise alone does not accumulate") {
  DriftModel m = DriftModel::none();
  m.noise_sigma = 0.002;
  m.seed = 5;
  const auto truth = ground_truth_stream(still(20.0), 100.0);
  const auto d = drift_angle(corrupt(truth, m, 100.0), truth);
  const std::vector<double> head(d.upper.begin(), d.upper.begin() + 500);
  const std::vector<double> tail(d.upper.end() - 500, d.upper.end());
  // Mean of |N(0, s^2 I3)| is s * 2 sqrt(2/pi).
  const double expected = 0.002 * 2.0 * std::sqrt(2.0 / kPi);
  CHECK(oracle::mean(head) == doctest::Approx(expected).epsilon(0.05));
  CHECK(oracle::mean(tail) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("expected drift grows with each sigma") {
  const auto truth = ground_truth_stream(still(10.0), 100.0);
  const std::vector<double> levels{0.0, 0.0005, 0.001, 0.002, 0.004, 0.008};

  auto expected_final = [&](auto set_sigma) {
    std::vector<double> means;
    for (double sigma : levels) {
      double sum = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        DriftModel m = DriftModel::none();
        m.seed = seed;
        set_sigma(m, sigma);
        sum += drift_angle(corrupt(truth, m, 100.0), truth).upper.back();
      }
      means.push_back(sum / 100.0);
    }
    return means;
  };

  const auto rw = expected_final([](DriftModel& m, double s) { m.bias_rw_sigma = s; });
  const auto noise = expected_final([](DriftModel& m, double s) { m.noise_sigma = s; });
  CHECK(spearman(levels, rw) > 0.9);
  CHECK(spearman(levels, noise) > 0.9);
  for (std::size_t k = 1; k < levels.size(); ++k) {
    CHECK(rw[k] >= rw[k - 1]);
    CHECK(noise[k] >= noise[k - 1]);
  }
}

TEST_CASE("drift model validation") {
  DriftModel m;
  m.noise_sigma = -1.0;
  CHECK_THROWS_AS(validate(m), std::invalid_argument);
  m = {};
  m.initial_bias[1] = std::nan("");
  CHECK_THROWS_AS(ImuCorruptor(m, 100.0), std::invalid_argument);
  CHECK(DriftModel::none().is_zero());
  CHECK_FALSE(DriftModel{}.is_zero());
  CHECK_THROWS(drift_angle({ImuPair{}}, {}));
}

TEST_CASE("trajectory file") {
  const Trajectory t = parse_trajectory(
      "# reach\n"
      "start 0 0 0 10 0\n"
      "1.5 20 -10 0 60 0 linear\n"
      "0.5 20 -10 0 60 0 hold  # pause\n"
      "2 0 0 0 10 0\n");
  REQUIRE(t.segments.size() == 3);
  CHECK(t.start.q4 == deg2rad(10));
  CHECK(t.segments[0].target.q1 == deg2rad(20));
  CHECK(t.segments[1].interpolation == Interpolation::hold);
  CHECK(t.segments[2].interpolation == Interpolation::linear);
  CHECK(t.duration() == 4.0);

  const Trajectory no_start = parse_trajectory("1 0 0 0 30 0\n");
  CHECK(no_start.start.q4 == deg2rad(30));

  CHECK_THROWS(parse_trajectory(""));
  CHECK_THROWS(parse_trajectory("abc 0 0 0 0 0\n"));
  CHECK_THROWS(parse_trajectory("1 0 0 0 0\n"));
  CHECK_THROWS(parse_trajectory("1 0 0 0 0 0 cubic\n"));
  CHECK_THROWS(parse_trajectory("1 0 0 0 170 0\n"));
  CHECK(to_string(interpolation_from_string("sinusoid")) == "sinusoid");
}
