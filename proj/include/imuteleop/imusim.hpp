// Synthetic fused-orientation source for the two arm sensors.
//
// Drift is modeled after fusion: each sensor carries a gyro bias that follows
// a random walk and is integrated into an error rotation, applied on the
// world side of the true orientation, followed by white orientation noise.
#pragma once

#include "imuteleop/arm.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace imuteleop {

struct DriftModel {
  double bias_rw_sigma = 0.001;  ///< rad/s per sqrt(s), per axis
  double noise_sigma = 0.002;    ///< rad per sample, per axis
  Vector3d initial_bias = Vector3d::Constant(0.005);  ///< rad/s
  std::uint64_t seed = 0;

  static DriftModel none() {
    DriftModel m;
    m.bias_rw_sigma = 0.0;
    m.noise_sigma = 0.0;
    m.initial_bias.setZero();
    return m;
  }

  bool is_zero() const {
    return bias_rw_sigma == 0.0 && noise_sigma == 0.0 && initial_bias.isZero(0.0);
  }
};

void validate(const DriftModel& m);

enum class Interpolation { hold, linear, sinusoid };

std::string to_string(Interpolation i);
Interpolation interpolation_from_string(const std::string& name);

struct TrajectorySegment {
  double duration = 0.0;
  JointConfig target;
  Interpolation interpolation = Interpolation::linear;
};

/// Joint-space script. Segment k moves from the previous target (or `start`)
/// to its own target over its duration.
struct Trajectory {
  JointConfig start;
  std::vector<TrajectorySegment> segments;

  double duration() const;
};

void validate(const Trajectory& traj);

JointConfig sample_trajectory(const Trajectory& traj, double t);

constexpr double kMinStreamRate = 10.0;
constexpr double kMaxStreamRate = 400.0;
constexpr double kDefaultStreamRate = 100.0;

/// Incremental drift process for one sensor. `step` returns the corrupted
/// orientation for the next sample and advances the bias by one period.
class SensorDrift {
 public:
  SensorDrift(const DriftModel& model, std::uint64_t substream, double dt);

  UnitQuaterniond step(const UnitQuaterniond& truth);

  const Vector3d& bias() const { return bias_; }
  const UnitQuaterniond& accumulated() const { return error_; }

 private:
  Vector3d gaussian3(double sigma);

  DriftModel model_;
  double dt_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Vector3d bias_;
  UnitQuaterniond error_ = UnitQuaterniond::Identity();
};

/// Both sensors, each with an independent substream of the model seed.
class ImuCorruptor {
 public:
  ImuCorruptor(const DriftModel& model, double rate);

  ImuPair step(const ImuPair& truth);

 private:
  bool passthrough_;
  SensorDrift upper_;
  SensorDrift forearm_;
};

/// Ground-truth stream at `rate` Hz, timestamps k / rate.
std::vector<ImuPair> ground_truth_stream(const Trajectory& traj, double rate);

std::vector<ImuPair> stream(const Trajectory& traj, const DriftModel& drift, double rate);

/// Corrupts an existing ground-truth stream sampled at `rate`.
std::vector<ImuPair> corrupt(const std::vector<ImuPair>& truth, const DriftModel& drift,
                             double rate);

struct DriftAngles {
  std::vector<double> upper;
  std::vector<double> forearm;
};

DriftAngles drift_angle(const std::vector<ImuPair>& corrupted,
                        const std::vector<ImuPair>& truth);

/// Trajectory text format, one directive per line, '#' starts a comment:
///   start q1 q2 q3 q4 q5
///   <duration_s> q1 q2 q3 q4 q5 <hold|linear|sinusoid>
/// Joint values in degrees.
Trajectory parse_trajectory(const std::string& text);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace imuteleop
