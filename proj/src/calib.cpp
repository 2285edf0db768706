#include "imuteleop/calib.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/SVD>

namespace imuteleop {

// -- Grid ---------------------------------------------------------------------

CalibrationGrid::CalibrationGrid(std::vector<GridPoint> points) : points_(std::move(points)) {
  if (points_.size() < kMinCalibrationSamples) {
    throw std::invalid_argument("CalibrationGrid: at least 4 points required");
  }
  std::set<int> seen;
  for (const auto& p : points_) {
    if (p.id < 1 || p.id > 9) {
      throw std::invalid_argument("CalibrationGrid: point ids must be in 1..9, got " +
                                  std::to_string(p.id));
    }
    if (!seen.insert(p.id).second) {
      throw std::invalid_argument("CalibrationGrid: duplicate point id " + std::to_string(p.id));
    }
    if (!is_finite(p.position)) {
      throw std::invalid_argument("CalibrationGrid: non-finite coordinates");
    }
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = i + 1; j < points_.size(); ++j) {
      if ((points_[i].position - points_[j].position).norm() <= 0.01) {
        throw std::invalid_argument("CalibrationGrid: points " + std::to_string(points_[i].id) +
                                    " and " + std::to_string(points_[j].id) +
                                    " are within 1 cm");
      }
    }
  }
  std::sort(points_.begin(), points_.end(),
            [](const GridPoint& a, const GridPoint& b) { return a.id < b.id; });
}

CalibrationGrid CalibrationGrid::standard() {
  std::vector<GridPoint> pts;
  int id = 1;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      // Rows top to bottom in z, columns near to far in x.
      pts.push_back({id++, Vector3d(0.35 + 0.1 * col, 0.0, 0.1 - 0.1 * row)});
    }
  }
  return CalibrationGrid(std::move(pts));
}

bool CalibrationGrid::contains(int id) const {
  return std::any_of(points_.begin(), points_.end(), [id](const GridPoint& p) { return p.id == id; });
}

const Vector3d& CalibrationGrid::position(int id) const {
  for (const auto& p : points_) {
    if (p.id == id) return p.position;
  }
  throw std::invalid_argument("calibration point " + std::to_string(id) + " is not in the grid");
}

// -- Distances and objective ----------------------------------------------------

double pair_distance(const PairDistances& d, int i, int j) {
  return d.at(i < j ? std::make_pair(i, j) : std::make_pair(j, i));
}

Vector3d predicted_fingertip(double upper, double forearm, double hand,
                             const CalibrationSample& s) {
  return fingertip_position(ArmModel(upper, forearm, hand), ImuPair{0.0, s.r1, s.r2});
}

Vector3d predicted_fingertip(double upper, double forearm, const CalibrationSample& s) {
  return predicted_fingertip(upper, forearm, kDefaultHandLength, s);
}

namespace {

std::vector<CalibrationSample> sorted_unique(const std::vector<CalibrationSample>& samples) {
  std::vector<CalibrationSample> out = samples;
  std::sort(out.begin(), out.end(), [](const CalibrationSample& a, const CalibrationSample& b) {
    return a.point_id < b.point_id;
  });
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (out[k].point_id == out[k - 1].point_id) {
      throw std::invalid_argument("duplicate calibration sample for point " +
                                  std::to_string(out[k].point_id));
    }
  }
  return out;
}

// Sensor-only part of the fingertip: p = l_u a + (l_f + l_h) b, where a and b
// are the upper-arm and forearm directions.
struct TouchDirections {
  int id;
  Vector3d upper_dir;
  Vector3d forearm_dir;
};

std::vector<TouchDirections> directions(const std::vector<CalibrationSample>& sorted) {
  std::vector<TouchDirections> out;
  out.reserve(sorted.size());
  for (const auto& s : sorted) {
    out.push_back({s.point_id, s.r1 * Vector3d::UnitX(), s.r2 * Vector3d::UnitX()});
  }
  return out;
}

double mismatch(double upper, double forearm, double hand,
                const std::vector<TouchDirections>& dirs, const std::vector<double>& truth) {
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j, ++k) {
      const Vector3d d = upper * (dirs[i].upper_dir - dirs[j].upper_dir) +
                         (forearm + hand) * (dirs[i].forearm_dir - dirs[j].forearm_dir);
      sum += std::abs(d.norm() - truth[k]);
    }
  }
  return sum;
}

std::vector<double> true_pair_list(const CalibrationGrid& grid,
                                   const std::vector<TouchDirections>& dirs) {
  std::vector<double> out;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      out.push_back((grid.position(dirs[i].id) - grid.position(dirs[j].id)).norm());
    }
  }
  return out;
}

}  // namespace

PairDistances fk_distances(double upper, double forearm,
                           const std::vector<CalibrationSample>& samples, double hand) {
  if (samples.size() < 2) throw std::invalid_argument("fk_distances: need at least 2 samples");
  const auto sorted = sorted_unique(samples);
  const ArmModel arm(upper, forearm, hand);
  std::vector<Vector3d> tips;
  tips.reserve(sorted.size());
  for (const auto& s : sorted) tips.push_back(fingertip_position(arm, {0.0, s.r1, s.r2}));
  PairDistances out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      out[{sorted[i].point_id, sorted[j].point_id}] = (tips[i] - tips[j]).norm();
    }
  }
  return out;
}

PairDistances true_distances(const CalibrationGrid& grid, const std::vector<int>& ids) {
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  PairDistances out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      out[{sorted[i], sorted[j]}] = (grid.position(sorted[i]) - grid.position(sorted[j])).norm();
    }
  }
  return out;
}

double objective(double upper, double forearm, const std::vector<CalibrationSample>& samples,
                 const CalibrationGrid& grid, double hand) {
  if (samples.size() < kMinCalibrationSamples) {
    throw UnderdeterminedError("calibration needs at least 4 touched points, got " +
                               std::to_string(samples.size()));
  }
  if (!(upper > 0.0 && forearm > 0.0)) {
    throw std::invalid_argument("objective: link lengths must be positive");
  }
  const auto dirs = directions(sorted_unique(samples));
  return mismatch(upper, forearm, hand, dirs, true_pair_list(grid, dirs));
}

// -- Solver ---------------------------------------------------------------------

namespace {

std::optional<std::string> collinearity_warning(const CalibrationGrid& grid,
                                                const std::vector<CalibrationSample>& sorted) {
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(sorted.size()), 3);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = grid.position(sorted[k].point_id).transpose();
  }
  const Eigen::RowVector3d centroid = pts.colwise().mean();
  const Eigen::MatrixXd centered = pts.rowwise() - centroid;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Vector3d axis = svd.matrixV().col(0);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < centered.rows(); ++k) {
    const Vector3d r = centered.row(k).transpose();
    worst = std::max(worst, (r - r.dot(axis) * axis).norm());
  }
  if (worst < 0.01) {
    return "touched points lie within 1 cm of a line; link lengths are poorly determined";
  }
  return std::nullopt;
}

struct Vertex {
  Eigen::Vector2d x;
  double f;
};

}  // namespace

CalibrationResult calibrate(const std::vector<CalibrationSample>& samples,
                            const CalibrationGrid& grid, const CalibrationOptions& options) {
  if (samples.size() < kMinCalibrationSamples) {
    throw UnderdeterminedError("calibration needs at least 4 touched points, got " +
                               std::to_string(samples.size()));
  }
  if (!(options.lower_bound > 0.0 && options.lower_bound < options.upper_bound &&
        options.upper_bound < 1.0)) {
    throw std::invalid_argument("calibrate: invalid bounds");
  }
  const auto sorted = sorted_unique(samples);
  const auto dirs = directions(sorted);
  const auto truth = true_pair_list(grid, dirs);

  const auto project = [&](Eigen::Vector2d x) {
    return x.cwiseMax(options.lower_bound).cwiseMin(options.upper_bound).eval();
  };
  const auto eval = [&](const Eigen::Vector2d& x) {
    return mismatch(x[0], x[1], options.hand, dirs, truth);
  };

  CalibrationResult result;
  result.conditioning_warning = collinearity_warning(grid, sorted);

  const double step = 0.1 * (options.upper_bound - options.lower_bound);
  const auto make_simplex = [&](const Eigen::Vector2d& origin) {
    std::array<Vertex, 3> s;
    s[0].x = origin;
    for (int d = 0; d < 2; ++d) {
      Eigen::Vector2d x = origin;
      x[d] += (x[d] + step <= options.upper_bound) ? step : -step;
      s[d + 1].x = project(x);
    }
    for (auto& v : s) v.f = eval(v.x);
    return s;
  };

  Vertex best{project(options.init), 0.0};
  best.f = eval(best.x);
  int iterations = 0;
  bool converged = false;

  // Nelder-Mead on the box, restarted from the incumbent until a restart no
  // longer improves it. The objective is a sum of absolute values, so a single
  // simplex can collapse onto a kink before reaching the minimum.
  while (iterations < options.max_iter) {
    auto simplex = make_simplex(best.x);
    const double start_f = best.f;
    bool local_converged = false;
    while (iterations < options.max_iter) {
      std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) {
        return a.f < b.f || (a.f == b.f && (a.x[0] < b.x[0] || (a.x[0] == b.x[0] && a.x[1] < b.x[1])));
      });
      const double size = std::max((simplex[1].x - simplex[0].x).norm(),
                                   (simplex[2].x - simplex[0].x).norm());
      if (size <= options.tol) {
        local_converged = true;
        break;
      }
      ++iterations;
      const Eigen::Vector2d centroid = 0.5 * (simplex[0].x + simplex[1].x);
      const Eigen::Vector2d worst = simplex[2].x;
      Vertex reflected{project(centroid + (centroid - worst)), 0.0};
      reflected.f = eval(reflected.x);
      if (reflected.f < simplex[0].f) {
        Vertex expanded{project(centroid + 2.0 * (centroid - worst)), 0.0};
        expanded.f = eval(expanded.x);
        simplex[2] = expanded.f < reflected.f ? expanded : reflected;
        continue;
      }
      if (reflected.f < simplex[1].f) {
        simplex[2] = reflected;
        continue;
      }
      const bool outside = reflected.f < simplex[2].f;
      Vertex contracted{outside ? project(centroid + 0.5 * (reflected.x - centroid))
                                : project(centroid + 0.5 * (worst - centroid)),
                        0.0};
      contracted.f = eval(contracted.x);
      if (contracted.f < (outside ? reflected.f : simplex[2].f)) {
        simplex[2] = contracted;
        continue;
      }
      for (int k = 1; k < 3; ++k) {
        simplex[k].x = simplex[0].x + 0.5 * (simplex[k].x - simplex[0].x);
        simplex[k].f = eval(simplex[k].x);
      }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    if (simplex[0].f < best.f) best = simplex[0];
    if (!local_converged) break;
    if (!(best.f < start_f)) {
      converged = true;
      break;
    }
  }

  result.upper = best.x[0];
  result.forearm = best.x[1];
  result.residual = best.f;
  result.iterations = iterations;
  result.converged = converged;
  return result;
}

PercentErrors percent_error(const CalibrationResult& result, double true_upper,
                            double true_forearm) {
  if (!(true_upper > 0.0 && true_forearm > 0.0)) {
    throw std::invalid_argument("percent_error: true lengths must be positive");
  }
  return {100.0 * std::abs(result.upper - true_upper) / true_upper,
          100.0 * std::abs(result.forearm - true_forearm) / true_forearm};
}

// -- Synthetic touches --------------------------------------------------------------

CalibrationSample synthesize_touch(const ArmModel& arm, const CalibrationGrid& grid, int id,
                                   double swivel, double pronation) {
  const JointConfig j = joints_reaching(arm.upper(), arm.forearm() + arm.hand(),
                                        grid.position(id), swivel, pronation);
  const ImuPair imus = joints_to_imus(j);
  return {id, imus.r1, imus.r2};
}

CalibrationSample perturb(const CalibrationSample& s, double rms_angle, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, rms_angle / std::sqrt(3.0));
  const auto noise = [&] {
    return quat_from_rotation_vector(Vector3d(normal(rng), normal(rng), normal(rng)));
  };
  CalibrationSample out = s;
  out.r1 = multiply(noise(), s.r1);
  out.r2 = multiply(noise(), s.r2);
  return out;
}

std::vector<StudyTrial> run_synthetic_study(const SyntheticStudy& study,
                                            const CalibrationGrid& grid,
                                            const CalibrationOptions& options) {
  if (study.points_per_trial < static_cast<int>(kMinCalibrationSamples) ||
      study.points_per_trial > static_cast<int>(grid.points().size())) {
    throw std::invalid_argument("synthetic study: points per trial must be in [4, grid size]");
  }
  std::mt19937_64 rng(study.seed);
  std::uniform_real_distribution<double> swivel(-deg2rad(20.0), deg2rad(20.0));
  std::vector<StudyTrial> trials;
  for (int t = 0; t < study.trials; ++t) {
    std::vector<int> ids;
    for (const auto& p : grid.points()) ids.push_back(p.id);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(static_cast<std::size_t>(study.points_per_trial));
    std::sort(ids.begin(), ids.end());

    std::vector<CalibrationSample> samples;
    for (int id : ids) {
      samples.push_back(perturb(synthesize_touch(study.arm, grid, id, swivel(rng)),
                                deg2rad(study.noise_rms_deg), rng));
    }
    StudyTrial trial{ids, calibrate(samples, grid, options)};
    trial.result.percent_errors =
        percent_error(trial.result, study.arm.upper(), study.arm.forearm());
    trials.push_back(std::move(trial));
  }
  return trials;
}

// -- Files ---------------------------------------------------------------------------

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename F>
void for_each_record(const std::string& text, F&& handle) {
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream in(line);
    handle(in, line_no);
  }
}

UnitQuaterniond read_quat(std::istringstream& in, int line_no) {
  double w, x, y, z;
  if (!(in >> w >> x >> y >> z)) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": expected quaternion w x y z");
  }
  const UnitQuaterniond q(w, x, y, z);
  if (!(std::abs(q.norm() - 1.0) < 1e-3)) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": quaternion is not unit");
  }
  return q.normalized();
}

}  // namespace

std::vector<CalibrationSample> parse_samples(const std::string& text) {
  std::vector<CalibrationSample> out;
  for_each_record(text, [&](std::istringstream& in, int line_no) {
    CalibrationSample s;
    if (!(in >> s.point_id)) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected point id");
    }
    s.r1 = read_quat(in, line_no);
    s.r2 = read_quat(in, line_no);
    out.push_back(s);
  });
  return out;
}

std::vector<CalibrationSample> load_samples(const std::filesystem::path& path) {
  return parse_samples(slurp(path));
}

std::string format_samples(const std::vector<CalibrationSample>& samples) {
  std::string out = "# point_id r1(w x y z) r2(w x y z)\n";
  char buf[512];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  s.point_id, s.r1.w(), s.r1.x(), s.r1.y(), s.r1.z(), s.r2.w(), s.r2.x(),
                  s.r2.y(), s.r2.z());
    out += buf;
  }
  return out;
}

CalibrationGrid parse_grid(const std::string& text) {
  std::vector<GridPoint> pts;
  for_each_record(text, [&](std::istringstream& in, int line_no) {
    GridPoint p;
    if (!(in >> p.id >> p.position.x() >> p.position.y() >> p.position.z())) {
      throw std::invalid_argument("grid line " + std::to_string(line_no) + ": expected id x y z");
    }
    pts.push_back(p);
  });
  return CalibrationGrid(std::move(pts));
}

CalibrationGrid load_grid(const std::filesystem::path& path) { return parse_grid(slurp(path)); }

// -- Report ----------------------------------------------------------------------------

CalibrationTable make_calibration_table(const std::vector<PercentErrors>& trials) {
  if (trials.empty()) throw std::invalid_argument("calibration table: no trials");
  CalibrationTable table;
  table.trials = trials;
  const double n = static_cast<double>(trials.size());
  for (const auto& t : trials) {
    table.mean.upper += t.upper / n;
    table.mean.forearm += t.forearm / n;
  }
  if (trials.size() > 1) {
    double su = 0.0, sf = 0.0;
    for (const auto& t : trials) {
      su += (t.upper - table.mean.upper) * (t.upper - table.mean.upper);
      sf += (t.forearm - table.mean.forearm) * (t.forearm - table.mean.forearm);
    }
    table.std_dev = {std::sqrt(su / (n - 1.0)), std::sqrt(sf / (n - 1.0))};
  }
  return table;
}

std::string render_calibration_table(const CalibrationTable& table) {
  std::string out = "Calibration results: link length errors as percentages of the true lengths\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s\n", "", "Upper arm", "Forearm");
  out += buf;
  const auto row = [&](const std::string& label, const PercentErrors& e) {
    std::snprintf(buf, sizeof buf, "%-10s %9.1f%% %9.1f%%\n", label.c_str(), e.upper, e.forearm);
    out += buf;
  };
  for (std::size_t k = 0; k < table.trials.size(); ++k) {
    row("Trial " + std::to_string(k + 1), table.trials[k]);
  }
  row("Mean", table.mean);
  row("Std Dev.", table.std_dev);
  return out;
}

std::string calibration_table_csv(const CalibrationTable& table) {
  std::string out = "row,upper_arm_pct,forearm_pct\n";
  char buf[128];
  const auto row = [&](const std::string& label, const PercentErrors& e) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", label.c_str(), e.upper, e.forearm);
    out += buf;
  };
  for (std::size_t k = 0; k < table.trials.size(); ++k) row(std::to_string(k + 1), table.trials[k]);
  row("mean", table.mean);
  row("std", table.std_dev);
  return out;
}

}  // namespace imuteleop
