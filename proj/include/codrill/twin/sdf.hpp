#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "codrill/twin/labeled_volume.hpp"

namespace codrill::twin {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Signed distance field of one structure. Distances are measured between voxel
/// centres: |value| is the distance to the nearest surface voxel of the
/// structure, negative inside it. The implied surface therefore sits on the
/// outermost labeled voxel centres, half a voxel inside the label boundary.
struct StructureField {
  int index = 0;
  bool absent = false;  ///< no labeled voxels; values are +inf
  std::vector<double> values;
};

struct SdfSet {
  Index3 dims{0, 0, 0};
  Eigen::Vector3d spacing = Eigen::Vector3d::Ones();
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::vector<StructureField> fields;  ///< same order as the volume's structure table

  const StructureField* field(int index) const;
  StructureField* field(int index);

  bool any_absent() const;
};

/// Exact signed distance fields for every declared structure.
SdfSet build_sdf(const LabeledVolume& volume);

/// Recompute the field of a single structure from scratch.
StructureField build_structure_field(const LabeledVolume& volume, int index);

struct DistanceQuery {
  std::vector<double> distances;   ///< d_n in structure-table order [mm]
  std::optional<int> nearest;      ///< structure index of min d_n (lowest index on ties)
  double min_distance = kInfiniteDistance;
  bool out_of_bounds = false;      ///< tip was clamped into the grid
  Eigen::Vector3d clamped_point = Eigen::Vector3d::Zero();
};

/// Trilinear interpolation of every field at `tip` (anatomy frame).
DistanceQuery query_distances(const SdfSet& sdf, const Eigen::Vector3d& tip);

/// Trilinear value of one field; `out_of_bounds` reports clamping.
double interpolate(const SdfSet& sdf, const StructureField& field, const Eigen::Vector3d& p,
                   bool* out_of_bounds = nullptr);

/// Central-difference gradient of the interpolated field (half-voxel step).
Eigen::Vector3d gradient(const SdfSet& sdf, const StructureField& field, const Eigen::Vector3d& p);

}  // namespace codrill::twin
