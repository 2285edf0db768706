#include "imuteleop/teleop/datagram.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>
#include <vector>

using namespace imuteleop;

namespace {

DatagramError::Kind error_kind(std::span<const std::uint8_t> bytes) {
  try {
    decode_datagram(bytes);
  } catch (const DatagramError& e) {
    return e.kind();
  }
  FAIL("decode did not throw");
  return {};
}

}  // namespace

TEST_CASE("golden vector: identity pose, t = 0, seq = 0") {
  // Written out by hand: magic, version, 4 + 8 + 24 zero bytes, then w = 1.0
  // (0x3FF0000000000000 little-endian) and three zero components.
  DatagramBytes golden{};
  golden[0] = 'T';
  golden[1] = 'P';
  golden[2] = 'O';
  golden[3] = 'S';
  golden[4] = 0x01;
  golden[47] = 0xF0;
  golden[48] = 0x3F;
  CHECK(encode_datagram(PoseDatagram{}) == golden);

  const PoseDatagram d = decode_datagram(golden);
  CHECK(d.seq == 0);
  CHECK(d.t == 0.0);
  CHECK(d.position == Vector3d::Zero());
  CHECK(d.orientation.coeffs() == UnitQuaterniond::Identity().coeffs());
}

TEST_CASE("field offsets") {
  PoseDatagram d;
  d.seq = 0x01020304;
  d.t = 2.0;  // 0x4000000000000000
  d.position = Vector3d(0.0, -2.0, 0.0);
  const auto b = encode_datagram(d);
  CHECK(b[5] == 0x04);
  CHECK(b[8] == 0x01);
  CHECK(b[16] == 0x40);
  CHECK(b[32] == 0xC0);  // sign bit of y
  CHECK(b[48] == 0x3F);
}

TEST_CASE("round trip is bit-exact") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<std::uint32_t> seq;
  for (int k = 0; k < 10000; ++k) {
    PoseDatagram d;
    d.seq = seq(rng);
    d.t = std::abs(u(rng)) * 1000;
    d.position = Vector3d(u(rng), u(rng), u(rng));
    d.orientation = oracle::random_quaternion(rng);
    const PoseDatagram back = decode_datagram(encode_datagram(d));
    CHECK(back.seq == d.seq);
    CHECK(back.t == d.t);
    CHECK(back.position == d.position);
    CHECK(back.orientation.coeffs() == d.orientation.coeffs());
    CHECK(back.pose().rotation.coeffs() == d.orientation.coeffs());
  }
}

TEST_CASE("decode reads the first 73 bytes of a longer buffer") {
  PoseDatagram d;
  d.seq = 9;
  const auto b = encode_datagram(d);
  std::vector<std::uint8_t> longer(b.begin(), b.end());
  longer.push_back(0xAA);
  CHECK(decode_datagram(longer).seq == 9);
}

TEST_CASE("malformed datagrams raise distinct errors") {
  const auto good = encode_datagram(PoseDatagram{});
  using K = DatagramError::Kind;

  CHECK(error_kind(std::span(good.data(), 72)) == K::short_buffer);
  CHECK(error_kind({}) == K::short_buffer);

  auto b = good;
  b[0] = 'X';
  CHECK(error_kind(b) == K::bad_magic);

  b = good;
  b[4] = 2;
  CHECK(error_kind(b) == K::unsupported_version);

  b = good;
  const double half = 0.5;
  std::memcpy(&b[41], &half, 8);
  CHECK(error_kind(b) == K::non_unit_quaternion);

  b = good;
  const double inf = std::numeric_limits<double>::infinity();
  std::memcpy(&b[25], &inf, 8);
  CHECK(error_kind(b) == K::non_finite);

  b = good;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(&b[9], &nan, 8);
  CHECK(error_kind(b) == K::non_finite);
}

TEST_CASE("encode refuses what decode would reject") {
  PoseDatagram d;
  d.orientation = UnitQuaterniond(2.0, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(encode_datagram(d), DatagramError);
  d = {};
  d.position.x() = std::nan("");
  CHECK_THROWS_AS(encode_datagram(d), DatagramError);
  // Within the 1e-6 unit tolerance.
  d = {};
  d.orientation = UnitQuaterniond(1.0 + 5e-7, 0.0, 0.0, 0.0);
  CHECK(decode_datagram(encode_datagram(d)).orientation.w() == 1.0 + 5e-7);
}
