#pragma once

#include <Eigen/Geometry>

namespace codrill::twin {

/// Proper rigid motion x -> rotation * x + translation (millimetres).
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_translation(const Eigen::Vector3d& t) { return {Eigen::Matrix3d::Identity(), t}; }

  static RigidTransform from_rotation(const Eigen::Matrix3d& r) { return {r, Eigen::Vector3d::Zero()}; }

  /// Roll-pitch-yaw (fixed-axis x, then y, then z) in radians.
  static RigidTransform from_rpy(const Eigen::Vector3d& translation, const Eigen::Vector3d& rpy) {
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    return {r, translation};
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  /// Orthonormal with det +1 within `tol`.
  bool is_rigid(double tol = 1e-9) const {
    return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

}  // namespace codrill::twin
