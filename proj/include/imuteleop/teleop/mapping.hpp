// Input-to-ring mapping with clutch.
//
// ring = rebase ∘ offset ∘ scaled(input), where scaled() multiplies the
// input translation only. Engaging the clutch freezes the ring; releasing it
// re-solves `rebase` so the current input lands on the frozen pose.
#pragma once

#include "imuteleop/geom.hpp"

namespace imuteleop {

struct Mapping {
  double scale = 1.0;
  RigidTransformd offset;
  bool clutch_engaged = false;
  RigidTransformd rebase;
  RigidTransformd frozen;  ///< ring pose held while the clutch is engaged
};

constexpr double kMinMappingScale = 0.1;
constexpr double kMaxMappingScale = 10.0;

void validate(const Mapping& m);

RigidTransformd apply_mapping(const Mapping& m, const RigidTransformd& input);

/// Input pose that maps to `ring` with the clutch released.
RigidTransformd invert_mapping(const Mapping& m, const RigidTransformd& ring);

Mapping engage_clutch(Mapping m, const RigidTransformd& input);
Mapping release_clutch(Mapping m, const RigidTransformd& input);

}  // namespace imuteleop
