#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "codrill/twin/rigid_transform.hpp"

namespace codrill::twin {

struct RegistrationResult {
  RigidTransform transform;  ///< maps model points onto measured points
  double rmse = 0.0;         ///< mm
};

/// Least-squares rigid fit (centroid alignment + SVD of the cross-covariance,
/// reflection corrected). Throws DegenerateConfigurationError on fewer than
/// three points, mismatched counts or collinear model points.
RegistrationResult register_point_sets(std::span<const Eigen::Vector3d> model,
                                       std::span<const Eigen::Vector3d> measured);

struct PivotResult {
  Eigen::Vector3d tip_offset = Eigen::Vector3d::Zero();  ///< tool frame [mm]
  Eigen::Vector3d pivot = Eigen::Vector3d::Zero();       ///< world frame [mm]
  double rmse = 0.0;                                      ///< mm
  double condition = 0.0;                                 ///< of the stacked system
};

/// Tool-tip pivot calibration from tracked tool poses (tool -> world).
/// Solves R_i * t_tip - p_pivot = -p_i in least squares.
/// Throws IllConditionedError when rotations are not diverse enough.
PivotResult pivot_calibrate(std::span<const RigidTransform> poses, double max_condition = 1e6);

}  // namespace codrill::twin
