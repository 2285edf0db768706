// Link-length calibration from fingertip touches on a grid of known points.
//
// The user touches grid points with an extended index finger and a locked
// wrist; the sensor orientations at each touch give predicted fingertip
// positions for any candidate (l_u, l_f). The estimate minimizes the summed
// absolute mismatch between predicted and true pairwise point distances.
#pragma once

#include "imuteleop/arm.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace imuteleop {

struct GridPoint {
  int id = 0;
  Vector3d position = Vector3d::Zero();
};

class CalibrationGrid {
 public:
  /// Throws std::invalid_argument on duplicate or out-of-range ids (1..9),
  /// fewer than 4 points, or two points closer than 1 cm.
  explicit CalibrationGrid(std::vector<GridPoint> points);

  /// 3x3 grid, 0.1 m pitch, in the x-z plane at y = 0, centered 0.45 m in
  /// front of the shoulder. Ids run row-major: rows from z = +0.1 down,
  /// columns from x = 0.35 outward.
  static CalibrationGrid standard();

  const std::vector<GridPoint>& points() const { return points_; }
  bool contains(int id) const;
  const Vector3d& position(int id) const;

 private:
  std::vector<GridPoint> points_;
};

struct CalibrationSample {
  int point_id = 0;
  UnitQuaterniond r1 = UnitQuaterniond::Identity();
  UnitQuaterniond r2 = UnitQuaterniond::Identity();
};

/// Distances keyed by (i, j) with i < j.
using PairDistances = std::map<std::pair<int, int>, double>;

double pair_distance(const PairDistances& d, int i, int j);

class UnderdeterminedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

constexpr std::size_t kMinCalibrationSamples = 4;

/// Fingertip with a 0.2 m hand and identity hand rotation.
Vector3d predicted_fingertip(double upper, double forearm, const CalibrationSample& s);
Vector3d predicted_fingertip(double upper, double forearm, double hand,
                             const CalibrationSample& s);

PairDistances fk_distances(double upper, double forearm,
                           const std::vector<CalibrationSample>& samples,
                           double hand = kDefaultHandLength);

PairDistances true_distances(const CalibrationGrid& grid, const std::vector<int>& ids);

/// Sum over sampled pairs of |d_fk(i,j) - d_true(i,j)|, in meters.
double objective(double upper, double forearm, const std::vector<CalibrationSample>& samples,
                 const CalibrationGrid& grid, double hand = kDefaultHandLength);

struct CalibrationOptions {
  Eigen::Vector2d init{0.30, 0.25};
  double lower_bound = 0.15;
  double upper_bound = 0.45;
  double tol = 1e-10;   ///< simplex size at convergence, meters
  int max_iter = 500;
  double hand = kDefaultHandLength;
};

struct PercentErrors {
  double upper = 0.0;
  double forearm = 0.0;
};

struct CalibrationResult {
  double upper = 0.0;
  double forearm = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when the touched points are (near-)collinear or coincident.
  std::optional<std::string> conditioning_warning;
  std::optional<PercentErrors> percent_errors;
};

CalibrationResult calibrate(const std::vector<CalibrationSample>& samples,
                            const CalibrationGrid& grid,
                            const CalibrationOptions& options = {});

PercentErrors percent_error(const CalibrationResult& result, double true_upper,
                            double true_forearm);

// -- Synthetic touches --------------------------------------------------------

/// Sensor orientations of `arm` touching grid point `id`, wrist locked.
/// `swivel` and `pronation` select one of the redundant arm postures.
CalibrationSample synthesize_touch(const ArmModel& arm, const CalibrationGrid& grid, int id,
                                   double swivel = 0.0, double pronation = 0.0);

/// Rotates each orientation by an independent random rotation whose angle
/// has RMS `rms_angle` (per-axis sigma rms_angle / sqrt(3)).
CalibrationSample perturb(const CalibrationSample& s, double rms_angle, std::mt19937_64& rng);

struct SyntheticStudy {
  ArmModel arm{0.28, 0.24};
  int points_per_trial = 4;
  double noise_rms_deg = 2.0;
  int trials = 10;
  std::uint64_t seed = 7;
};

struct StudyTrial {
  std::vector<int> point_ids;
  CalibrationResult result;
};

std::vector<StudyTrial> run_synthetic_study(const SyntheticStudy& study,
                                            const CalibrationGrid& grid,
                                            const CalibrationOptions& options = {});

// -- Files --------------------------------------------------------------------

/// One sample per line: point_id r1w r1x r1y r1z r2w r2x r2y r2z.
std::vector<CalibrationSample> parse_samples(const std::string& text);
std::vector<CalibrationSample> load_samples(const std::filesystem::path& path);
std::string format_samples(const std::vector<CalibrationSample>& samples);

/// One point per line: id x y z (meters).
CalibrationGrid parse_grid(const std::string& text);
CalibrationGrid load_grid(const std::filesystem::path& path);

// -- Table-style report ---------------------------------------------------------

struct CalibrationTable {
  std::vector<PercentErrors> trials;
  PercentErrors mean;
  PercentErrors std_dev;  ///< sample standard deviation (n - 1)
};

CalibrationTable make_calibration_table(const std::vector<PercentErrors>& trials);
std::string render_calibration_table(const CalibrationTable& table);
std::string calibration_table_csv(const CalibrationTable& table);

}  // namespace imuteleop
