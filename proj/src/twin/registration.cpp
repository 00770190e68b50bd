#include "codrill/twin/registration.hpp"

#include <cmath>
#include <string>

#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "codrill/common/error.hpp"

namespace codrill::twin {

RegistrationResult register_point_sets(std::span<const Eigen::Vector3d> model,
                                       std::span<const Eigen::Vector3d> measured) {
  if (model.size() != measured.size())
    throw DegenerateConfigurationError("point counts differ: " + std::to_string(model.size()) + " model vs " +
                                       std::to_string(measured.size()) + " measured");
  if (model.size() < 3) throw DegenerateConfigurationError("registration needs at least 3 correspondences");

  const double n = static_cast<double>(model.size());
  Eigen::Vector3d model_centroid = Eigen::Vector3d::Zero(), measured_centroid = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < model.size(); ++i) {
    model_centroid += model[i];
    measured_centroid += measured[i];
  }
  model_centroid /= n;
  measured_centroid /= n;

  Eigen::Matrix3d spread = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Eigen::Vector3d a = model[i] - model_centroid;
    const Eigen::Vector3d b = measured[i] - measured_centroid;
    spread += a * a.transpose();
    cross += a * b.transpose();
  }

  // Collinear (or coincident) model points leave rotation about the line free.
  const Eigen::Vector3d extent = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(spread).eigenvalues();
  if (!(extent[2] > 0.0) || extent[1] <= 1e-12 * extent[2])
    throw DegenerateConfigurationError("model points are collinear");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RegistrationResult out;
  out.transform.rotation = v * fix * u.transpose();
  out.transform.translation = measured_centroid - out.transform.rotation * model_centroid;
  double sq = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) sq += (out.transform.apply(model[i]) - measured[i]).squaredNorm();
  out.rmse = std::sqrt(sq / n);
  return out;
}

PivotResult pivot_calibrate(std::span<const RigidTransform> poses, double max_condition) {
  if (poses.size() < 3) throw IllConditionedError("pivot calibration needs at least 3 poses");
  const Eigen::Index rows = static_cast<Eigen::Index>(3 * poses.size());
  Eigen::MatrixXd a(rows, 6);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(3 * i);
    a.block<3, 3>(r, 0) = poses[i].rotation;
    a.block<3, 3>(r, 3) = -Eigen::Matrix3d::Identity();
    b.segment<3>(r) = -poses[i].translation;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double condition = s[5] > 0.0 ? s[0] / s[5] : std::numeric_limits<double>::infinity();
  if (!(condition <= max_condition))
    throw IllConditionedError("tool rotations are not diverse enough (condition " + std::to_string(condition) + ")");

  const Eigen::VectorXd x = svd.solve(b);
  PivotResult out;
  out.tip_offset = x.head<3>();
  out.pivot = x.tail<3>();
  out.condition = condition;
  double sq = 0.0;
  for (const auto& pose : poses) sq += (pose.apply(out.tip_offset) - out.pivot).squaredNorm();
  out.rmse = std::sqrt(sq / static_cast<double>(poses.size()));
  return out;
}

}  // namespace codrill::twin
