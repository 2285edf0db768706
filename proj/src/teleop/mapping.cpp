#include "imuteleop/teleop/mapping.hpp"

#include <stdexcept>

namespace imuteleop {

namespace {

RigidTransformd scaled(const RigidTransformd& input, double scale) {
  return {input.rotation, scale * input.translation};
}

}  // namespace

void validate(const Mapping& m) {
  if (!(m.scale >= kMinMappingScale && m.scale <= kMaxMappingScale)) {
    throw std::invalid_argument("Mapping: scale must be within [0.1, 10]");
  }
}

RigidTransformd apply_mapping(const Mapping& m, const RigidTransformd& input) {
  if (m.clutch_engaged) return m.frozen;
  return compose(m.rebase, compose(m.offset, scaled(input, m.scale)));
}

RigidTransformd invert_mapping(const Mapping& m, const RigidTransformd& ring) {
  const RigidTransformd s = compose(inverse(compose(m.rebase, m.offset)), ring);
  return {s.rotation, s.translation / m.scale};
}

Mapping engage_clutch(Mapping m, const RigidTransformd& input) {
  if (m.clutch_engaged) return m;
  m.frozen = apply_mapping(m, input);
  m.clutch_engaged = true;
  return m;
}

Mapping release_clutch(Mapping m, const RigidTransformd& input) {
  if (!m.clutch_engaged) return m;
  m.rebase = compose(m.frozen, inverse(compose(m.offset, scaled(input, m.scale))));
  m.clutch_engaged = false;
  return m;
}

}  // namespace imuteleop
