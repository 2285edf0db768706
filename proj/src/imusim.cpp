#include "imuteleop/imusim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace imuteleop {

void validate(const DriftModel& m) {
  if (!(m.bias_rw_sigma >= 0.0) || !(m.noise_sigma >= 0.0)) {
    throw std::invalid_argument("DriftModel: sigmas must be non-negative");
  }
  if (!is_finite(m.initial_bias)) {
    throw std::invalid_argument("DriftModel: initial bias must be finite");
  }
}

std::string to_string(Interpolation i) {
  switch (i) {
    case Interpolation::hold: return "hold";
    case Interpolation::linear: return "linear";
    case Interpolation::sinusoid: return "sinusoid";
  }
  return "?";
}

Interpolation interpolation_from_string(const std::string& name) {
  if (name == "hold") return Interpolation::hold;
  if (name == "linear") return Interpolation::linear;
  if (name == "sinusoid") return Interpolation::sinusoid;
  throw std::invalid_argument("unknown interpolation '" + name + "'");
}

double Trajectory::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

void validate(const Trajectory& traj) {
  if (traj.segments.empty()) throw std::invalid_argument("Trajectory: no segments");
  validate(traj.start);
  for (const auto& s : traj.segments) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
      throw std::invalid_argument("Trajectory: segment durations must be positive");
    }
    validate(s.target);
  }
}

namespace {

// Blend weights are applied as (1-w) a + w b so that w = 0 and w = 1 return
// the endpoints exactly.
JointConfig blend(const JointConfig& a, const JointConfig& b, double w) {
  JointConfig out;
  for (int i = 0; i < 5; ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return out;
}

double weight(Interpolation interp, double u) {
  switch (interp) {
    case Interpolation::hold: return 1.0;
    case Interpolation::linear: return u;
    case Interpolation::sinusoid: return 0.5 * (1.0 - std::cos(kPi * u));
  }
  return u;
}

}  // namespace

JointConfig sample_trajectory(const Trajectory& traj, double t) {
  const double total = traj.duration();
  if (!(t >= 0.0 && t <= total)) {
    throw std::out_of_range("sample_trajectory: t outside [0, duration]");
  }
  JointConfig from = traj.start;
  double begin = 0.0;
  for (std::size_t k = 0; k < traj.segments.size(); ++k) {
    const auto& seg = traj.segments[k];
    const double end = begin + seg.duration;
    if (t < end || k + 1 == traj.segments.size()) {
      if (seg.interpolation == Interpolation::hold) return seg.target;
      const double u = std::min((t - begin) / seg.duration, 1.0);
      if (u >= 1.0) return seg.target;
      return blend(from, seg.target, weight(seg.interpolation, u));
    }
    from = seg.target;
    begin = end;
  }
  return from;
}

SensorDrift::SensorDrift(const DriftModel& model, std::uint64_t substream, double dt)
    : model_(model), dt_(dt), bias_(model.initial_bias) {
  std::seed_seq seq{static_cast<std::uint32_t>(model.seed),
                    static_cast<std::uint32_t>(model.seed >> 32),
                    static_cast<std::uint32_t>(substream)};
  rng_.seed(seq);
}

Vector3d SensorDrift::gaussian3(double sigma) {
  Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = sigma * normal_(rng_);
  return v;
}

UnitQuaterniond SensorDrift::step(const UnitQuaterniond& truth) {
  UnitQuaterniond out = multiply(error_, truth);
  if (model_.noise_sigma > 0.0) {
    out = multiply(quat_from_rotation_vector(gaussian3(model_.noise_sigma)), out);
  }
  // Integrate the current bias over one period, then let it wander.
  error_ = multiply(quat_from_rotation_vector<double>(bias_ * dt_), error_);
  if (model_.bias_rw_sigma > 0.0) {
    bias_ += gaussian3(model_.bias_rw_sigma * std::sqrt(dt_));
  }
  return out;
}

ImuCorruptor::ImuCorruptor(const DriftModel& model, double rate)
    : passthrough_(model.is_zero()),
      upper_(model, 1, 1.0 / rate),
      forearm_(model, 2, 1.0 / rate) {
  validate(model);
}

ImuPair ImuCorruptor::step(const ImuPair& truth) {
  if (passthrough_) return truth;
  return {truth.t, upper_.step(truth.r1), forearm_.step(truth.r2)};
}

namespace {

void check_rate(double rate) {
  if (!(rate >= kMinStreamRate && rate <= kMaxStreamRate)) {
    throw std::invalid_argument("stream rate must be within [10, 400] Hz");
  }
}

}  // namespace

std::vector<ImuPair> ground_truth_stream(const Trajectory& traj, double rate) {
  check_rate(rate);
  validate(traj);
  const double total = traj.duration();
  const auto count = static_cast<std::size_t>(std::floor(total * rate + 1e-9)) + 1;
  std::vector<ImuPair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / rate;
    out.push_back(joints_to_imus(sample_trajectory(traj, std::min(t, total)), t));
  }
  return out;
}

std::vector<ImuPair> corrupt(const std::vector<ImuPair>& truth, const DriftModel& drift,
                             double rate) {
  check_rate(rate);
  ImuCorruptor corruptor(drift, rate);
  std::vector<ImuPair> out;
  out.reserve(truth.size());
  for (const auto& s : truth) out.push_back(corruptor.step(s));
  return out;
}

std::vector<ImuPair> stream(const Trajectory& traj, const DriftModel& drift, double rate) {
  return corrupt(ground_truth_stream(traj, rate), drift, rate);
}

DriftAngles drift_angle(const std::vector<ImuPair>& corrupted,
                        const std::vector<ImuPair>& truth) {
  if (corrupted.size() != truth.size()) {
    throw std::invalid_argument("drift_angle: sequences differ in length");
  }
  DriftAngles out;
  out.upper.reserve(truth.size());
  out.forearm.reserve(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    out.upper.push_back(angle_between(corrupted[k].r1, truth[k].r1));
    out.forearm.push_back(angle_between(corrupted[k].r2, truth[k].r2));
  }
  return out;
}

namespace {

JointConfig read_joints_deg(std::istringstream& in, int line_no) {
  JointConfig j;
  for (int i = 0; i < 5; ++i) {
    double deg;
    if (!(in >> deg)) {
      throw std::invalid_argument("trajectory line " + std::to_string(line_no) +
                                  ": expected five joint values in degrees");
    }
    j[i] = deg2rad(deg);
  }
  return j;
}

}  // namespace

Trajectory parse_trajectory(const std::string& text) {
  Trajectory traj;
  bool have_start = false;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::string head;
    if (!(in >> head)) continue;
    if (head == "start") {
      traj.start = read_joints_deg(in, line_no);
      have_start = true;
      continue;
    }
    TrajectorySegment seg;
    try {
      seg.duration = std::stod(head);
    } catch (const std::exception&) {
      throw std::invalid_argument("trajectory line " + std::to_string(line_no) +
                                  ": expected a duration");
    }
    seg.target = read_joints_deg(in, line_no);
    std::string interp = "linear";
    in >> interp;
    seg.interpolation = interpolation_from_string(interp);
    traj.segments.push_back(seg);
  }
  if (!have_start && !traj.segments.empty()) traj.start = traj.segments.front().target;
  validate(traj);
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trajectory(buf.str());
}

}  // namespace imuteleop
