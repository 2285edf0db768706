// Steady-hand ring-on-wire task: wire centerline geometry, the accuracy
// metrics, collision test and trial bookkeeping.
#pragma once

#include "imuteleop/geom.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace imuteleop {

struct LineSegment {
  Vector3d start;
  Vector3d end;
};

/// Circular arc from `start` to `end`, turning right-handedly about `axis`
/// through `center`.
struct ArcSegment {
  Vector3d start;
  Vector3d end;
  Vector3d center;
  Vector3d axis;
};

using WireSegment = std::variant<LineSegment, ArcSegment>;

constexpr double kWireDiameter = 0.025;
constexpr double kRingInnerDiameter = 0.060;
constexpr double kRingOuterDiameter = 0.100;

struct CenterlinePoint {
  Vector3d point;
  Vector3d tangent;  ///< unit
  double s = 0.0;    ///< arclength from the wire start, meters
};

class Wire {
 public:
  /// Throws std::invalid_argument unless the chain is G1-continuous within
  /// 1e-9, every arc is consistent (equal radii, start/end on the plane
  /// normal to the axis) and the total length is positive.
  Wire(std::string id, std::vector<WireSegment> segments, double tube_radius = kWireDiameter / 2);

  const std::string& id() const { return id_; }
  const std::vector<WireSegment>& segments() const { return segments_; }
  double tube_radius() const { return tube_radius_; }
  double length() const { return cumulative_.back(); }

  /// Point and unit tangent at arclength s (clamped to [0, length]).
  CenterlinePoint at(double s) const;

  /// Closest centerline point to `p`. Ties resolve to the smallest arclength.
  CenterlinePoint closest_point(const Vector3d& p) const;

 private:
  std::string id_;
  std::vector<WireSegment> segments_;
  double tube_radius_;
  std::vector<double> lengths_;
  std::vector<double> cumulative_;  // size segments + 1
};

double segment_length(const WireSegment& seg);
double arc_angle(const ArcSegment& arc);
double arc_radius(const ArcSegment& arc);

/// Horizontal wire along +x centered on the task origin.
Wire make_straight_wire(double length = 0.4);

constexpr double kDefaultSArcRadius = 0.15;
constexpr double kDefaultSArcAngle = 2.0 * kPi / 3.0;

/// Two mirrored arcs in the vertical x-z plane joined tangentially, a hump
/// then a dip, start and end on the x axis symmetric about the origin.
Wire make_s_wire(double arc_radius = kDefaultSArcRadius, double arc_angle = kDefaultSArcAngle);

struct Ring {
  Vector3d center = Vector3d::Zero();
  Vector3d axis = Vector3d::UnitX();  ///< unit normal of the ring plane
  double inner_radius = kRingInnerDiameter / 2;
  double outer_radius = kRingOuterDiameter / 2;
};

void validate(const Ring& ring);

/// The ring's axis is the local +x of its pose.
Ring ring_at(const RigidTransformd& pose, const Ring& shape = {});

/// Distance from the ring center to the closest centerline point, meters.
double position_error(const Wire& wire, const Ring& ring);

/// Angle between ring axis and wire tangent, folded into [0, 90] degrees.
double orientation_error(const Wire& wire, const Ring& ring);

/// Inner radius minus tube radius, formed in millimetres (so 30 - 12.5 is
/// exact for the standard dimensions).
double collision_threshold_mm(const Wire& wire, const Ring& ring);
double collision_threshold(const Wire& wire, const Ring& ring);

bool collision(const Wire& wire, const Ring& ring);
bool collides_at(double position_error_m, double threshold_mm);

struct TaskMetrics {
  CenterlinePoint closest;
  double position_error = 0.0;     ///< meters
  double orientation_error = 0.0;  ///< degrees
  bool collision = false;
};

TaskMetrics evaluate(const Wire& wire, const Ring& ring);

struct TrialSample {
  double t = 0.0;
  RigidTransformd ring_pose;
  Vector3d wire_point = Vector3d::Zero();
  Vector3d wire_tangent = Vector3d::UnitX();
  double position_error = 0.0;     ///< meters
  double orientation_error = 0.0;  ///< degrees
  bool collision = false;
  double s = 0.0;

  friend bool operator==(const TrialSample& a, const TrialSample& b);
};

struct TrialRecord {
  std::string wire_id;
  std::vector<TrialSample> samples;
  bool completed = false;

  friend bool operator==(const TrialRecord& a, const TrialRecord& b);
};

struct TrialConfig {
  double start_margin = 0.010;  ///< arclength, meters
  double end_margin = 0.010;
  Ring ring_shape;
};

struct TimedPose {
  double t = 0.0;
  RigidTransformd pose;
};

/// Incremental trial: recording begins at the first pose whose closest
/// arclength is within the start margin and completes on the first recorded
/// pose reaching the end margin.
class TrialRecorder {
 public:
  enum class Phase { waiting, recording, completed };

  TrialRecorder(const Wire& wire, TrialConfig config = {});

  /// Throws std::invalid_argument if t does not increase.
  Phase push(double t, const RigidTransformd& ring_pose);
  Phase push(double t, const RigidTransformd& ring_pose, const TaskMetrics& metrics);

  Phase phase() const { return phase_; }
  const TrialRecord& record() const { return record_; }
  TrialRecord take();

 private:
  const Wire* wire_;
  TrialConfig config_;
  Phase phase_ = Phase::waiting;
  std::optional<double> last_t_;
  TrialRecord record_;
};

TrialRecord run_trial(const Wire& wire, const std::vector<TimedPose>& stream,
                      const TrialConfig& config = {});

struct TrialSummary {
  double completion_time = 0.0;      ///< seconds
  double mean_position_error = 0.0;  ///< millimetres
  double mean_orientation_error = 0.0;  ///< degrees
  double non_collision_pct = 0.0;
  bool completed = false;
};

TrialSummary summarize(const TrialRecord& record);

/// Wire description file (JSON):
///   {"id": "...", "tube_radius": 0.0125,
///    "segments": [{"type": "line", "start": [x,y,z], "end": [x,y,z]},
///                 {"type": "arc", "start": [...], "end": [...],
///                  "center": [...], "axis": [...]}]}
Wire parse_wire(const std::string& text);
Wire load_wire(const std::filesystem::path& path);
std::string format_wire(const Wire& wire);

}  // namespace imuteleop
