// Pose datagram: 73 bytes, little-endian.
//
//   offset  size  field
//        0     4  magic "TPOS"
//        4     1  version (1)
//        5     4  seq, uint32
//        9     8  t, float64 seconds
//       17    24  position x, y, z, float64 meters
//       41    32  quaternion w, x, y, z, float64
#pragma once

#include "imuteleop/geom.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace imuteleop {

constexpr std::size_t kDatagramSize = 73;
constexpr std::array<std::uint8_t, 4> kDatagramMagic{'T', 'P', 'O', 'S'};
constexpr std::uint8_t kDatagramVersion = 1;

struct PoseDatagram {
  std::uint32_t seq = 0;
  double t = 0.0;
  Vector3d position = Vector3d::Zero();
  /// Stored as sent; (w, x, y, z) on the wire.
  UnitQuaterniond orientation = UnitQuaterniond::Identity();

  /// Not renormalized: decode already bounds the norm error at 1e-6, and a
  /// replayed stream must reproduce the sender's pose bit for bit.
  RigidTransformd pose() const { return {orientation, position}; }
};

using DatagramBytes = std::array<std::uint8_t, kDatagramSize>;

class DatagramError : public std::runtime_error {
 public:
  enum class Kind { short_buffer, bad_magic, unsupported_version, non_unit_quaternion, non_finite };

  DatagramError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Throws DatagramError if the datagram would not decode (non-unit
/// quaternion, non-finite fields).
DatagramBytes encode_datagram(const PoseDatagram& d);

/// Reads the first 73 bytes of `bytes`.
PoseDatagram decode_datagram(std::span<const std::uint8_t> bytes);

}  // namespace imuteleop
