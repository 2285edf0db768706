#include "imuteleop/task.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace imuteleop {

namespace {

constexpr double kG1Tolerance = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vector3d in_plane(const Vector3d& v, const Vector3d& axis) { return v - v.dot(axis) * axis; }

// Signed angle from a to b about axis, in [0, 2 pi).
double sweep(const Vector3d& a, const Vector3d& b, const Vector3d& axis) {
  double angle = std::atan2(axis.dot(a.cross(b)), a.dot(b));
  if (angle < 0.0) angle += 2.0 * kPi;
  return angle;
}

CenterlinePoint point_on(const WireSegment& seg, double u, double seg_length) {
  return std::visit(
      overloaded{
          [&](const LineSegment& line) {
            const Vector3d dir = (line.end - line.start) / seg_length;
            const double w = u / seg_length;
            return CenterlinePoint{(1.0 - w) * line.start + w * line.end, dir, u};
          },
          [&](const ArcSegment& arc) {
            const double radius = arc_radius(arc);
            const Vector3d axis = arc.axis.normalized();
            const Vector3d r = quat_from_axis_angle(axis, u / radius) * (arc.start - arc.center);
            return CenterlinePoint{arc.center + r, axis.cross(r).normalized(), u};
          }},
      seg);
}

CenterlinePoint closest_on(const WireSegment& seg, const Vector3d& p, double seg_length) {
  return std::visit(
      overloaded{
          [&](const LineSegment& line) {
            const Vector3d d = line.end - line.start;
            const double w = std::clamp((p - line.start).dot(d) / d.squaredNorm(), 0.0, 1.0);
            return CenterlinePoint{(1.0 - w) * line.start + w * line.end, d / seg_length,
                                   w * seg_length};
          },
          [&](const ArcSegment& arc) {
            const Vector3d axis = arc.axis.normalized();
            const Vector3d a = arc.start - arc.center;
            const Vector3d rp = in_plane(p - arc.center, axis);
            const double total = arc_angle(arc);
            const double radius = a.norm();
            if (rp.norm() > 1e-12) {
              const double phi = sweep(a, rp, axis);
              if (phi <= total) return point_on(arc, phi * radius, seg_length);
            }
            const CenterlinePoint first = point_on(arc, 0.0, seg_length);
            const CenterlinePoint last = point_on(arc, seg_length, seg_length);
            return (p - last.point).norm() < (p - first.point).norm() ? last : first;
          }},
      seg);
}

}  // namespace

double arc_radius(const ArcSegment& arc) { return (arc.start - arc.center).norm(); }

double arc_angle(const ArcSegment& arc) {
  const Vector3d axis = arc.axis.normalized();
  const double angle = sweep(arc.start - arc.center, arc.end - arc.center, axis);
  // Coincident endpoints describe a full turn.
  return angle == 0.0 ? 2.0 * kPi : angle;
}

double segment_length(const WireSegment& seg) {
  return std::visit(overloaded{[](const LineSegment& l) { return (l.end - l.start).norm(); },
                               [](const ArcSegment& a) { return arc_radius(a) * arc_angle(a); }},
                    seg);
}

Wire::Wire(std::string id, std::vector<WireSegment> segments, double tube_radius)
    : id_(std::move(id)), segments_(std::move(segments)), tube_radius_(tube_radius) {
  if (segments_.empty()) throw std::invalid_argument("Wire: no segments");
  if (!(tube_radius_ > 0.0)) throw std::invalid_argument("Wire: tube radius must be positive");
  for (auto& seg : segments_) {
    if (auto* arc = std::get_if<ArcSegment>(&seg)) {
      if (!(arc->axis.norm() > 1e-12)) throw std::invalid_argument("Wire: arc axis is zero");
      arc->axis.normalize();
      const Vector3d a = arc->start - arc->center;
      const Vector3d b = arc->end - arc->center;
      if (std::abs(a.norm() - b.norm()) > kG1Tolerance || std::abs(a.dot(arc->axis)) > kG1Tolerance ||
          std::abs(b.dot(arc->axis)) > kG1Tolerance) {
        throw std::invalid_argument("Wire: arc endpoints are not on a circle about its axis");
      }
    }
    const double len = segment_length(seg);
    if (!(len > 0.0)) throw std::invalid_argument("Wire: zero-length segment");
    lengths_.push_back(len);
  }
  cumulative_.push_back(0.0);
  for (double len : lengths_) cumulative_.push_back(cumulative_.back() + len);

  for (std::size_t k = 0; k + 1 < segments_.size(); ++k) {
    const CenterlinePoint end = point_on(segments_[k], lengths_[k], lengths_[k]);
    const CenterlinePoint next = point_on(segments_[k + 1], 0.0, lengths_[k + 1]);
    if ((end.point - next.point).norm() > kG1Tolerance ||
        (end.tangent - next.tangent).norm() > kG1Tolerance) {
      throw std::invalid_argument("Wire: segments " + std::to_string(k) + " and " +
                                  std::to_string(k + 1) + " are not G1-continuous");
    }
  }
}

CenterlinePoint Wire::at(double s) const {
  s = std::clamp(s, 0.0, length());
  std::size_t k = 0;
  while (k + 1 < segments_.size() && s > cumulative_[k + 1]) ++k;
  CenterlinePoint c = point_on(segments_[k], std::min(s - cumulative_[k], lengths_[k]), lengths_[k]);
  c.s = s;
  return c;
}

CenterlinePoint Wire::closest_point(const Vector3d& p) const {
  CenterlinePoint best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    CenterlinePoint c = closest_on(segments_[k], p, lengths_[k]);
    const double dist = (p - c.point).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
      best.s = std::min(cumulative_[k] + c.s, length());
    }
  }
  return best;
}

Wire make_straight_wire(double length) {
  if (!(length > 0.0)) throw std::invalid_argument("make_straight_wire: length must be positive");
  return Wire("straight",
              {LineSegment{Vector3d(-length / 2, 0.0, 0.0), Vector3d(length / 2, 0.0, 0.0)}});
}

Wire make_s_wire(double radius, double angle) {
  if (!(radius > kRingInnerDiameter / 2)) {
    throw std::invalid_argument("make_s_wire: arc radius too tight for the ring");
  }
  if (!(angle > 0.0 && angle <= kPi)) {
    throw std::invalid_argument("make_s_wire: arc angle must be in (0, pi]");
  }
  const double half = angle / 2;
  const double chord = 2.0 * radius * std::sin(half);
  // Hump: heading +angle/2 turning clockwise about +y down to -angle/2.
  const Vector3d start(-chord, 0.0, 0.0);
  const Vector3d c1 = start + radius * Vector3d(std::sin(half), 0.0, -std::cos(half));
  const Vector3d mid = c1 + rot_y(angle) * (start - c1);
  // Dip: heading -angle/2 turning back up about -y.
  const Vector3d c2 = mid + radius * Vector3d(std::sin(half), 0.0, std::cos(half));
  const Vector3d end = c2 + rot_y(-angle) * (mid - c2);
  return Wire("s-shaped", {ArcSegment{start, mid, c1, Vector3d::UnitY()},
                           ArcSegment{mid, end, c2, -Vector3d::UnitY()}});
}

void validate(const Ring& ring) {
  if (!(ring.inner_radius > 0.0 && ring.inner_radius < ring.outer_radius)) {
    throw std::invalid_argument("Ring: need 0 < inner radius < outer radius");
  }
  if (std::abs(ring.axis.norm() - 1.0) > 1e-9) throw std::invalid_argument("Ring: axis not unit");
}

Ring ring_at(const RigidTransformd& pose, const Ring& shape) {
  Ring ring = shape;
  ring.center = pose.translation;
  ring.axis = (pose.rotation * Vector3d::UnitX()).normalized();
  return ring;
}

double position_error(const Wire& wire, const Ring& ring) {
  return (wire.closest_point(ring.center).point - ring.center).norm();
}

namespace {

double folded_angle_deg(const Vector3d& tangent, const Vector3d& axis) {
  const double c = std::abs(tangent.dot(axis)) / (tangent.norm() * axis.norm());
  return rad2deg(std::acos(std::min(c, 1.0)));
}

}  // namespace

double orientation_error(const Wire& wire, const Ring& ring) {
  return folded_angle_deg(wire.closest_point(ring.center).tangent, ring.axis);
}

double collision_threshold_mm(const Wire& wire, const Ring& ring) {
  return 1000.0 * ring.inner_radius - 1000.0 * wire.tube_radius();
}

double collision_threshold(const Wire& wire, const Ring& ring) {
  return collision_threshold_mm(wire, ring) / 1000.0;
}

bool collides_at(double position_error_m, double threshold_mm) {
  return 1000.0 * position_error_m > threshold_mm;
}

bool collision(const Wire& wire, const Ring& ring) {
  return collides_at(position_error(wire, ring), collision_threshold_mm(wire, ring));
}

TaskMetrics evaluate(const Wire& wire, const Ring& ring) {
  TaskMetrics m;
  m.closest = wire.closest_point(ring.center);
  m.position_error = (m.closest.point - ring.center).norm();
  m.orientation_error = folded_angle_deg(m.closest.tangent, ring.axis);
  m.collision = collides_at(m.position_error, collision_threshold_mm(wire, ring));
  return m;
}

bool operator==(const TrialSample& a, const TrialSample& b) {
  return a.t == b.t && a.ring_pose.translation == b.ring_pose.translation &&
         a.ring_pose.rotation.coeffs() == b.ring_pose.rotation.coeffs() &&
         a.wire_point == b.wire_point && a.wire_tangent == b.wire_tangent &&
         a.position_error == b.position_error && a.orientation_error == b.orientation_error &&
         a.collision == b.collision && a.s == b.s;
}

bool operator==(const TrialRecord& a, const TrialRecord& b) {
  return a.wire_id == b.wire_id && a.completed == b.completed && a.samples == b.samples;
}

TrialRecorder::TrialRecorder(const Wire& wire, TrialConfig config)
    : wire_(&wire), config_(std::move(config)) {
  validate(config_.ring_shape);
  record_.wire_id = wire.id();
}

TrialRecorder::Phase TrialRecorder::push(double t, const RigidTransformd& ring_pose) {
  return push(t, ring_pose, evaluate(*wire_, ring_at(ring_pose, config_.ring_shape)));
}

TrialRecorder::Phase TrialRecorder::push(double t, const RigidTransformd& ring_pose,
                                         const TaskMetrics& m) {
  if (last_t_ && !(t > *last_t_)) {
    throw std::invalid_argument("TrialRecorder: timestamps must strictly increase");
  }
  last_t_ = t;
  if (phase_ == Phase::completed) return phase_;
  if (phase_ == Phase::waiting) {
    if (!(m.closest.s < config_.start_margin)) return phase_;
    phase_ = Phase::recording;
  }
  record_.samples.push_back({t, ring_pose, m.closest.point, m.closest.tangent, m.position_error,
                             m.orientation_error, m.collision, m.closest.s});
  if (m.closest.s >= wire_->length() - config_.end_margin) {
    phase_ = Phase::completed;
    record_.completed = true;
  }
  return phase_;
}

TrialRecord TrialRecorder::take() {
  TrialRecord out = std::move(record_);
  record_ = TrialRecord{};
  record_.wire_id = wire_->id();
  phase_ = Phase::waiting;
  return out;
}

TrialRecord run_trial(const Wire& wire, const std::vector<TimedPose>& stream,
                      const TrialConfig& config) {
  TrialRecorder recorder(wire, config);
  for (const auto& sample : stream) {
    if (recorder.push(sample.t, sample.pose) == TrialRecorder::Phase::completed) break;
  }
  return recorder.take();
}

TrialSummary summarize(const TrialRecord& record) {
  if (record.samples.empty()) throw std::invalid_argument("summarize: empty trial record");
  TrialSummary s;
  const double n = static_cast<double>(record.samples.size());
  double pos = 0.0, ori = 0.0;
  std::size_t clear = 0;
  for (const auto& x : record.samples) {
    pos += 1000.0 * x.position_error;
    ori += x.orientation_error;
    if (!x.collision) ++clear;
  }
  s.completion_time = record.samples.back().t - record.samples.front().t;
  s.mean_position_error = pos / n;
  s.mean_orientation_error = ori / n;
  s.non_collision_pct = 100.0 * static_cast<double>(clear) / n;
  s.completed = record.completed;
  return s;
}

// -- Files ----------------------------------------------------------------------

namespace {

using nlohmann::json;

Vector3d vec_from(const json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw std::invalid_argument(std::string("wire file: '") + key + "' must be [x, y, z]");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json vec_to(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Wire parse_wire(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("wire file: ") + e.what());
  }
  try {
    std::vector<WireSegment> segments;
    for (const auto& s : doc.at("segments")) {
      const auto type = s.at("type").get<std::string>();
      if (type == "line") {
        segments.emplace_back(LineSegment{vec_from(s, "start"), vec_from(s, "end")});
      } else if (type == "arc") {
        segments.emplace_back(ArcSegment{vec_from(s, "start"), vec_from(s, "end"),
                                         vec_from(s, "center"), vec_from(s, "axis")});
      } else {
        throw std::invalid_argument("wire file: unknown segment type '" + type + "'");
      }
    }
    return Wire(doc.value("id", std::string("wire")), std::move(segments),
                doc.value("tube_radius", kWireDiameter / 2));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("wire file: ") + e.what());
  }
}

Wire load_wire(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open wire file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_wire(buf.str());
}

std::string format_wire(const Wire& wire) {
  json segments = json::array();
  for (const auto& seg : wire.segments()) {
    std::visit(overloaded{[&](const LineSegment& l) {
                            segments.push_back({{"type", "line"},
                                                {"start", vec_to(l.start)},
                                                {"end", vec_to(l.end)}});
                          },
                          [&](const ArcSegment& a) {
                            segments.push_back({{"type", "arc"},
                                                {"start", vec_to(a.start)},
                                                {"end", vec_to(a.end)},
                                                {"center", vec_to(a.center)},
                                                {"axis", vec_to(a.axis)}});
                          }},
               seg);
  }
  json doc = {{"id", wire.id()}, {"tube_radius", wire.tube_radius()}, {"segments", segments}};
  return doc.dump(2) + "\n";
}

}  // namespace imuteleop
