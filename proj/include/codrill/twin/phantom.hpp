#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "codrill/twin/labeled_volume.hpp"

namespace codrill::twin {

struct PhantomSpec {
  Index3 dims{48, 48, 40};
  double spacing = 0.5;  ///< mm, isotropic
  std::uint64_t seed = 1;
  double jitter = 0.5;   ///< mm of random displacement applied to each structure
};

/// Synthetic temporal-bone-like block after cortical mastoidectomy: a cortical
/// shell over trabecular bone with an open cavity whose floor and walls expose
/// the facial nerve, the tegmen plate and the sigmoid sinus. Labels follow the
/// default five-structure table.
LabeledVolume generate_phantom(const PhantomSpec& spec);

/// Closest exposed surface point of a structure (a surface voxel centre with an
/// air neighbour) to `from`. Throws ConfigurationError if none exists.
Eigen::Vector3d exposed_surface_point(const LabeledVolume& volume, int index, const Eigen::Vector3d& from);

}  // namespace codrill::twin
