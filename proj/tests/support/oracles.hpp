#pragma once

// Independent reference computations used by the tests. Nothing here calls the
// library's distance transform or solvers.

#include <cmath>
#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "codrill/twin/labeled_volume.hpp"

namespace codrill::testing {

inline bool oracle_is_surface(const twin::LabeledVolume& v, int i, int j, int k, std::uint8_t label) {
  if (v.labels[i + v.dims[0] * (j + v.dims[1] * k)] != label) return false;
  const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (const auto& o : off) {
    const int a = i + o[0], b = j + o[1], c = k + o[2];
    if (a < 0 || b < 0 || c < 0 || a >= v.dims[0] || b >= v.dims[1] || c >= v.dims[2]) return true;
    if (v.labels[a + v.dims[0] * (b + v.dims[1] * c)] != label) return true;
  }
  return false;
}

/// O(N^2) signed distance: scan every surface voxel for every voxel.
inline std::vector<double> brute_force_sdf(const twin::LabeledVolume& v, int index) {
  const auto label = static_cast<std::uint8_t>(index);
  std::vector<std::array<int, 3>> sites;
  for (int k = 0; k < v.dims[2]; ++k)
    for (int j = 0; j < v.dims[1]; ++j)
      for (int i = 0; i < v.dims[0]; ++i)
        if (oracle_is_surface(v, i, j, k, label)) sites.push_back({i, j, k});
  std::vector<double> out(v.labels.size(), std::numeric_limits<double>::infinity());
  if (sites.empty()) return out;
  const double sx = v.spacing.x(), sy = v.spacing.y(), sz = v.spacing.z();
  std::size_t idx = 0;
  for (int k = 0; k < v.dims[2]; ++k)
    for (int j = 0; j < v.dims[1]; ++j)
      for (int i = 0; i < v.dims[0]; ++i, ++idx) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : sites) {
          const double dx = (i - s[0]) * sx, dy = (j - s[1]) * sy, dz = (k - s[2]) * sz;
          const double d2 = dx * dx + dy * dy + dz * dz;
          if (d2 < best) best = d2;
        }
        const double d = std::sqrt(best);
        out[idx] = v.labels[idx] == label ? -d : d;
      }
  return out;
}

/// Unsigned distance from an arbitrary point to the nearest surface voxel centre.
inline double brute_force_point_distance(const twin::LabeledVolume& v, int index, const Eigen::Vector3d& p) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < v.dims[2]; ++k)
    for (int j = 0; j < v.dims[1]; ++j)
      for (int i = 0; i < v.dims[0]; ++i)
        if (oracle_is_surface(v, i, j, k, static_cast<std::uint8_t>(index))) {
          const Eigen::Vector3d c = v.origin + v.spacing.cwiseProduct(Eigen::Vector3d(i, j, k));
          best = std::min(best, (c - p).norm());
        }
  return best;
}

/// Minimum-norm least-squares solution through the SVD pseudoinverse.
inline Eigen::VectorXd svd_pseudoinverse_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double tol = 1e-12 * s[0];
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) inv[i] = 1.0 / s[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * b;
}

/// Damped least squares via the SVD filter factors s / (s^2 + mu^2).
inline Eigen::VectorXd svd_damped_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double mu) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd f(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) f[i] = s[i] / (s[i] * s[i] + mu * mu);
  return svd.matrixV() * f.asDiagonal() * svd.matrixU().transpose() * b;
}

}  // namespace codrill::testing
