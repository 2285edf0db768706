#include "imuteleop/teleop/datagram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace imuteleop {

namespace {

constexpr double kUnitTolerance = 1e-6;

template <typename T>
void put_le(std::uint8_t* out, T value) {
  std::array<std::uint8_t, sizeof(T)> raw;
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  std::memcpy(out, raw.data(), sizeof(T));
}

template <typename T>
T get_le(const std::uint8_t* in) {
  std::array<std::uint8_t, sizeof(T)> raw;
  std::memcpy(raw.data(), in, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

void check_fields(double t, const Vector3d& p, const UnitQuaterniond& q) {
  if (!std::isfinite(t) || !is_finite(p)) {
    throw DatagramError(DatagramError::Kind::non_finite, "pose datagram: non-finite field");
  }
  const double n = q.norm();
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    throw DatagramError(DatagramError::Kind::non_unit_quaternion,
                        "pose datagram: quaternion norm " + std::to_string(n) + " is not 1");
  }
}

}  // namespace

DatagramBytes encode_datagram(const PoseDatagram& d) {
  check_fields(d.t, d.position, d.orientation);
  DatagramBytes out{};
  std::copy(kDatagramMagic.begin(), kDatagramMagic.end(), out.begin());
  out[4] = kDatagramVersion;
  put_le<std::uint32_t>(&out[5], d.seq);
  put_le<double>(&out[9], d.t);
  for (int i = 0; i < 3; ++i) put_le<double>(&out[17 + 8 * i], d.position[i]);
  const double q[4] = {d.orientation.w(), d.orientation.x(), d.orientation.y(), d.orientation.z()};
  for (int i = 0; i < 4; ++i) put_le<double>(&out[41 + 8 * i], q[i]);
  return out;
}

PoseDatagram decode_datagram(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kDatagramSize) {
    throw DatagramError(DatagramError::Kind::short_buffer,
                        "pose datagram: " + std::to_string(bytes.size()) + " bytes, need 73");
  }
  if (!std::equal(kDatagramMagic.begin(), kDatagramMagic.end(), bytes.begin())) {
    throw DatagramError(DatagramError::Kind::bad_magic, "pose datagram: bad magic");
  }
  if (bytes[4] != kDatagramVersion) {
    throw DatagramError(DatagramError::Kind::unsupported_version,
                        "pose datagram: unsupported version " + std::to_string(bytes[4]));
  }
  PoseDatagram d;
  d.seq = get_le<std::uint32_t>(&bytes[5]);
  d.t = get_le<double>(&bytes[9]);
  for (int i = 0; i < 3; ++i) d.position[i] = get_le<double>(&bytes[17 + 8 * i]);
  double q[4];
  for (int i = 0; i < 4; ++i) q[i] = get_le<double>(&bytes[41 + 8 * i]);
  d.orientation = UnitQuaterniond(q[0], q[1], q[2], q[3]);
  check_fields(d.t, d.position, d.orientation);
  return d;
}

}  // namespace imuteleop
