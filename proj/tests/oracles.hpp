// Independent reference computations for the tests. Nothing here calls the
// library's geometry; rotations go through explicit matrices.
#pragma once

#include "imuteleop/arm.hpp"
#include "imuteleop/task.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <random>
#include <variant>
#include <vector>

namespace oracle {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

/// Rotation matrix of the unit quaternion (w, x, y, z), written out.
inline Mat3 quat_matrix(double w, double x, double y, double z) {
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

inline Mat3 quat_matrix(const Eigen::Quaterniond& q) { return quat_matrix(q.w(), q.x(), q.y(), q.z()); }

/// Rodrigues' formula for a unit axis.
inline Mat3 rodrigues(const Vec3& axis, double angle) {
  const Vec3 k = axis.normalized();
  Mat3 K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Mat3::Identity() + std::sin(angle) * K + (1 - std::cos(angle)) * K * K;
}

inline Mat4 frame(const Mat3& r, const Vec3& p) {
  Mat4 f = Mat4::Identity();
  f.topLeftCorner<3, 3>() = r;
  f.topRightCorner<3, 1>() = p;
  return f;
}

/// Wrist frame as the product F[R1, 0] F[R1^T R2, (lu,0,0)] F[I, (lf,0,0)].
inline Mat4 wrist_frame(double lu, double lf, const Mat3& r1, const Mat3& r2) {
  return frame(r1, Vec3::Zero()) * frame(r1.transpose() * r2, Vec3(lu, 0, 0)) *
         frame(Mat3::Identity(), Vec3(lf, 0, 0));
}

/// Fingertip: the wrist frame followed by F[I, (lh,0,0)].
inline Vec3 fingertip(double lu, double lf, double lh, const Mat3& r1, const Mat3& r2) {
  return (wrist_frame(lu, lf, r1, r2) * frame(Mat3::Identity(), Vec3(lh, 0, 0)))
      .topRightCorner<3, 1>();
}

/// Five-joint serial chain: shoulder Rz(q1) Ry(q2) Rx(q3), upper link,
/// elbow Rz(q4) Rx(q5), forearm link. Returns the wrist frame.
inline Mat4 serial_chain(double lu, double lf, const imuteleop::JointConfig& j) {
  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
  const Mat3 shoulder = rodrigues(Z, j.q1) * rodrigues(Y, j.q2) * rodrigues(X, j.q3);
  const Mat3 elbow = rodrigues(Z, j.q4) * rodrigues(X, j.q5);
  return frame(shoulder, Vec3::Zero()) * frame(Mat3::Identity(), Vec3(lu, 0, 0)) *
         frame(elbow, Vec3::Zero()) * frame(Mat3::Identity(), Vec3(lf, 0, 0));
}

/// Uniform random rotation (Shoemake).
inline Eigen::Quaterniond random_quaternion(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  const double two_pi = 2 * 3.14159265358979323846;
  return Eigen::Quaterniond(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                            a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
}

/// Right-handed sweep from start to end about the axis, in (0, 2 pi].
inline double sweep(const imuteleop::ArcSegment& arc) {
  const Vec3 n = arc.axis.normalized();
  const Vec3 a = arc.start - arc.center, b = arc.end - arc.center;
  double ang = std::atan2(n.dot(a.cross(b)), a.dot(b));
  if (ang <= 0) ang += 2 * 3.14159265358979323846;
  return ang;
}

/// About n evenly spaced centerline points, built from the segment
/// definitions (lerp along lines, Rodrigues rotation along arcs).
inline std::vector<Vec3> sample_centerline(const imuteleop::Wire& wire, int n) {
  double total = 0;
  std::vector<double> lengths;
  for (const auto& seg : wire.segments()) {
    if (const auto* l = std::get_if<imuteleop::LineSegment>(&seg)) {
      lengths.push_back((l->end - l->start).norm());
    } else {
      const auto& a = std::get<imuteleop::ArcSegment>(seg);
      lengths.push_back((a.start - a.center).norm() * sweep(a));
    }
    total += lengths.back();
  }
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const int m = std::max(1, static_cast<int>(std::lround(n * lengths[i] / total)));
    const auto& seg = wire.segments()[i];
    for (int k = 0; k <= m; ++k) {
      const double u = static_cast<double>(k) / m;
      if (const auto* l = std::get_if<imuteleop::LineSegment>(&seg)) {
        pts.push_back(l->start + u * (l->end - l->start));
      } else {
        const auto& a = std::get<imuteleop::ArcSegment>(seg);
        pts.push_back(a.center + rodrigues(a.axis, u * sweep(a)) * (a.start - a.center));
      }
    }
  }
  return pts;
}

inline double brute_distance(const std::vector<Vec3>& pts, const Vec3& p) {
  double best = INFINITY;
  for (const auto& c : pts) best = std::min(best, (c - p).squaredNorm());
  return std::sqrt(best);
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace oracle
