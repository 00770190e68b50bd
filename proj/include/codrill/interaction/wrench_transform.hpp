#pragma once

#include "codrill/robot/wrench.hpp"
#include "codrill/twin/rigid_transform.hpp"

namespace codrill::interaction {

using robot::Frame;
using robot::Wrench;
using twin::RigidTransform;

/// Re-express a wrench acting at the origin of frame A in frame B, where
/// `a_to_b` maps A coordinates to B coordinates:
///   force' = R f,  torque' = R tau + t x (R f).
Wrench transform_wrench(const Wrench& w, const RigidTransform& a_to_b, Frame target);

inline Wrench transform_wrench(const Wrench& w, const RigidTransform& a_to_b) {
  return transform_wrench(w, a_to_b, w.frame);
}

}  // namespace codrill::interaction
