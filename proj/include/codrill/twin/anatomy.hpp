#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "codrill/twin/labeled_volume.hpp"
#include "codrill/twin/sdf.hpp"

namespace codrill::twin {

struct CarveResult {
  std::size_t removed = 0;
  bool breach = false;            ///< the burr reached a critical structure
  std::vector<int> affected;      ///< structures that lost voxels
  std::size_t full_rebuilds = 0;  ///< fields that needed a whole-grid recompute
};

/// The digital twin: labels plus their distance fields, kept consistent.
/// Mutations (carve) require exclusive access; queries are const.
class AnatomyModel {
 public:
  AnatomyModel() = default;
  explicit AnatomyModel(LabeledVolume volume);

  const LabeledVolume& volume() const { return volume_; }
  const SdfSet& sdf() const { return sdf_; }
  const StructureTable& structures() const { return volume_.structures; }

  DistanceQuery query(const Eigen::Vector3d& tip) const { return query_distances(sdf_, tip); }

  /// Remove carvable voxels whose centre lies within `burr_radius` of `center`.
  /// Critical voxels are never removed; touching one flags a breach.
  CarveResult carve(const Eigen::Vector3d& center, double burr_radius);

  std::size_t total_removed() const { return total_removed_; }

  /// Largest interior depth of a structure (mm), 0 if absent.
  double max_depth(int index) const;

 private:
  void update_field(int index, const std::vector<std::size_t>& removed, double window_pad, CarveResult& result);

  LabeledVolume volume_;
  SdfSet sdf_;
  std::size_t total_removed_ = 0;
};

}  // namespace codrill::twin
