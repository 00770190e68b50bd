#include "codrill/interaction/wrench_transform.hpp"

namespace codrill::interaction {

Wrench transform_wrench(const Wrench& w, const RigidTransform& a_to_b, Frame target) {
  Wrench out;
  out.force = a_to_b.rotation * w.force;
  out.torque = a_to_b.rotation * w.torque + a_to_b.translation.cross(out.force);
  out.frame = target;
  return out;
}

}  // namespace codrill::interaction
