#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "codrill/twin/labeled_volume.hpp"

namespace codrill::twin {

/// Exact squared Euclidean distance from every voxel centre to the nearest
/// site voxel centre (mm^2), via separable lower envelopes of parabolas.
/// Voxels with no site anywhere in the grid get +infinity.
std::vector<double> squared_distance_transform(const Index3& dims, const Eigen::Vector3d& spacing,
                                               std::span<const std::uint8_t> sites);

/// One-dimensional transform along a strided line. `f` holds squared distances
/// (or +inf), `w` is the sample spacing. Scratch buffers must hold n (v) and
/// n + 1 (z) entries.
void squared_distance_1d(const double* f, int n, std::ptrdiff_t stride, double w, double* out,
                         int* v, double* z);

}  // namespace codrill::twin
