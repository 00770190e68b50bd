#include "codrill/interaction/contact.hpp"

#include <algorithm>
#include <cmath>

#include "codrill/common/error.hpp"

namespace codrill::interaction {

ContactResult compute_contact_force(const twin::AnatomyModel& anatomy, const Eigen::Vector3d& tip,
                                    const Eigen::Vector3d& velocity, const Eigen::Matrix3d& tip_rotation,
                                    NormalMemory& memory, std::span<const double> ablation_offsets) {
  const auto& sdf = anatomy.sdf();
  const auto& specs = anatomy.structures();
  const std::size_t n = sdf.fields.size();
  if (memory.normals.size() != n) {
    memory.normals.assign(n, Eigen::Vector3d::UnitZ());
    memory.valid.assign(n, false);
  }
  const auto query = anatomy.query(tip);
  const Eigen::Vector3d& at = query.clamped_point;

  ContactResult result;
  for (std::size_t s = 0; s < n; ++s) {
    const double d = query.distances[s];
    if (!std::isfinite(d) || d >= 0.0) continue;
    MaterialContact c;
    c.index = sdf.fields[s].index;
    c.penetration = -d;
    const double offset = s < ablation_offsets.size() ? ablation_offsets[s] : 0.0;
    c.effective_penetration = std::max(0.0, c.penetration - offset);
    c.stiffness = specs[s].stiffness;
    c.damping = specs[s].damping;

    const Eigen::Vector3d g = twin::gradient(sdf, sdf.fields[s], at);
    const double norm = g.norm();
    if (std::isfinite(norm) && norm > 1e-9) {
      c.normal = g / norm;
      memory.normals[s] = c.normal;
      memory.valid[s] = true;
    } else {
      c.normal = memory.normals[s];
      c.normal_fallback = true;
      result.normal_fallback = true;
    }
    if (c.effective_penetration > 0.0) {
      const double closing = std::max(0.0, -velocity.dot(c.normal));
      c.force = (c.stiffness * c.effective_penetration + c.damping * closing) * c.normal;
    }
    result.world_force += c.force;
    result.contacts.push_back(c);
  }
  result.tip = {tip_rotation.transpose() * result.world_force, Eigen::Vector3d::Zero(), Frame::tip};
  return result;
}

Ablation::Ablation(AblationParams params, std::size_t structure_count)
    : params_(params), offsets_(structure_count, 0.0) {
  if (!(params_.rate >= 0.0) || !(params_.cut_threshold >= 0.0) || !(params_.burr_radius > 0.0))
    throw ConfigurationError("ablation parameters must be non-negative with a positive burr radius");
}

AblationStep Ablation::step(twin::AnatomyModel& anatomy, const ContactResult& contact, const Eigen::Vector3d& tip,
                            bool drill_on, double dt) {
  AblationStep out;
  const auto& specs = anatomy.structures();
  std::vector<const MaterialContact*> by_slot(offsets_.size(), nullptr);
  for (const auto& c : contact.contacts) {
    const auto slot = twin::structure_slot(specs, c.index);
    if (slot && *slot < by_slot.size()) by_slot[*slot] = &c;
  }
  const double voxel = anatomy.volume().spacing.minCoeff();
  for (std::size_t s = 0; s < offsets_.size(); ++s) {
    const MaterialContact* c = by_slot[s];
    if (c == nullptr || !specs[s].carvable()) {
      offsets_[s] = 0.0;
      continue;
    }
    if (!drill_on) {
      offsets_[s] = std::min(offsets_[s], c->penetration);
      continue;
    }
    const double normal_force = c->stiffness * c->effective_penetration;
    offsets_[s] += params_.rate * std::max(0.0, normal_force - params_.cut_threshold) * dt;
    offsets_[s] = std::min(offsets_[s], c->penetration);
    if (offsets_[s] < 0.5 * voxel) continue;

    const Eigen::Vector3d surface = tip + c->normal * c->penetration;
    const Eigen::Vector3d centre = surface + c->normal * (params_.burr_radius - offsets_[s]);
    const auto carve = anatomy.carve(centre, params_.burr_radius);
    out.carved = out.carved || carve.removed > 0;
    out.carve.removed += carve.removed;
    out.carve.breach = out.carve.breach || carve.breach;
    out.carve.full_rebuilds += carve.full_rebuilds;
    out.carve.affected.insert(out.carve.affected.end(), carve.affected.begin(), carve.affected.end());

    const auto& field = anatomy.sdf().fields[s];
    const double after = field.absent ? 0.0 : std::max(0.0, -twin::interpolate(anatomy.sdf(), field, tip));
    offsets_[s] = std::clamp(offsets_[s] - (c->penetration - after), 0.0, after);
  }
  return out;
}

}  // namespace codrill::interaction
