#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "codrill/twin/structure.hpp"

namespace codrill::twin {

using Index3 = std::array<int, 3>;

/// Labeled voxel anatomy. Voxel (i,j,k) is centred at origin + spacing .* (i,j,k);
/// storage is x-fastest.
struct LabeledVolume {
  Index3 dims{0, 0, 0};
  Eigen::Vector3d spacing = Eigen::Vector3d::Ones();
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::vector<std::uint8_t> labels;
  StructureTable structures;

  LabeledVolume() = default;
  LabeledVolume(Index3 dims, Eigen::Vector3d spacing, Eigen::Vector3d origin, StructureTable structures);

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
  }

  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }

  Index3 unravel(std::size_t idx) const {
    const int i = static_cast<int>(idx % dims[0]);
    const std::size_t rest = idx / dims[0];
    return {i, static_cast<int>(rest % dims[1]), static_cast<int>(rest / dims[1])};
  }

  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }

  std::uint8_t at(int i, int j, int k) const { return labels[linear(i, j, k)]; }
  std::uint8_t& at(int i, int j, int k) { return labels[linear(i, j, k)]; }

  Eigen::Vector3d center(int i, int j, int k) const {
    return origin + spacing.cwiseProduct(Eigen::Vector3d(i, j, k));
  }

  /// Labeled voxel with a 6-neighbour of another label (grid exterior counts as
  /// another label).
  bool is_surface(int i, int j, int k, std::uint8_t label) const;

  /// Throws ValidationError listing every violated invariant.
  void validate() const;

  std::size_t count(std::uint8_t label) const;
};

}  // namespace codrill::twin
