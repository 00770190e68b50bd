#include "codrill/twin/anatomy.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "codrill/common/error.hpp"
#include "codrill/twin/edt.hpp"

namespace codrill::twin {

namespace {

struct Box {
  Index3 lo{0, 0, 0};
  Index3 hi{-1, -1, -1};

  bool empty() const { return hi[0] < lo[0]; }

  void extend(int i, int j, int k) {
    if (empty()) {
      lo = {i, j, k};
      hi = {i, j, k};
      return;
    }
    const int p[3] = {i, j, k};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }

  void merge(const Box& o) {
    if (o.empty()) return;
    extend(o.lo[0], o.lo[1], o.lo[2]);
    extend(o.hi[0], o.hi[1], o.hi[2]);
  }

  Box grown(const Index3& by, const Index3& dims) const {
    Box b;
    for (int a = 0; a < 3; ++a) {
      b.lo[a] = std::max(0, lo[a] - by[a]);
      b.hi[a] = std::min(dims[a] - 1, hi[a] + by[a]);
    }
    return b;
  }

  bool covers(const Index3& dims) const {
    return lo[0] == 0 && lo[1] == 0 && lo[2] == 0 && hi[0] == dims[0] - 1 && hi[1] == dims[1] - 1 &&
           hi[2] == dims[2] - 1;
  }

  Index3 extent() const { return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1}; }
};

}  // namespace

AnatomyModel::AnatomyModel(LabeledVolume volume) : volume_(std::move(volume)), sdf_(build_sdf(volume_)) {}

double AnatomyModel::max_depth(int index) const {
  const StructureField* f = sdf_.field(index);
  if (!f || f->absent) return 0.0;
  const double lowest = *std::min_element(f->values.begin(), f->values.end());
  return std::max(0.0, -lowest);
}

CarveResult AnatomyModel::carve(const Eigen::Vector3d& center, double burr_radius) {
  if (!(burr_radius > 0.0) || !center.allFinite())
    throw ConfigurationError("carve requires a finite centre and a positive burr radius");
  CarveResult result;
  Index3 lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::ceil((center[a] - burr_radius - volume_.origin[a]) / volume_.spacing[a])));
    hi[a] = std::min(volume_.dims[a] - 1,
                     static_cast<int>(std::floor((center[a] + burr_radius - volume_.origin[a]) / volume_.spacing[a])));
    if (lo[a] > hi[a]) return result;
  }
  const double r2 = burr_radius * burr_radius;
  std::map<int, std::vector<std::size_t>> removed;
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        if ((volume_.center(i, j, k) - center).squaredNorm() > r2) continue;
        const std::uint8_t label = volume_.at(i, j, k);
        if (label == 0) continue;
        const StructureSpec* spec = find_structure(volume_.structures, label);
        if (!spec) continue;
        if (spec->critical) {
          result.breach = true;
          continue;
        }
        removed[label].push_back(volume_.linear(i, j, k));
      }
  if (removed.empty()) return result;

  double max_gamma = 0.0;
  for (const auto& s : volume_.structures) max_gamma = std::max(max_gamma, s.gamma);

  for (const auto& [index, voxels] : removed)
    for (std::size_t v : voxels) volume_.labels[v] = 0;
  for (const auto& [index, voxels] : removed) {
    update_field(index, voxels, burr_radius + max_gamma, result);
    result.affected.push_back(index);
    result.removed += voxels.size();
  }
  total_removed_ += result.removed;
  return result;
}

// Exact incremental update after removing `removed` voxels of one structure.
// Let C be the box around the removed voxels grown by one voxel: every site that
// disappeared or appeared lies in C. A voxel whose old |distance| is strictly
// below its distance to C keeps its nearest site and cannot gain a closer one,
// so its value is unchanged. All other voxels are recomputed inside a window,
// using only the sites of a larger box, and each recomputed value is certified
// against the nearest possible site outside that box; the box grows until every
// value is certified (the whole grid always is).
void AnatomyModel::update_field(int index, const std::vector<std::size_t>& removed, double window_pad,
                                CarveResult& result) {
  StructureField& field = *sdf_.field(index);
  const auto label = static_cast<std::uint8_t>(index);
  const Index3& dims = volume_.dims;
  const Eigen::Vector3d& spacing = volume_.spacing;

  if (volume_.count(label) == 0) {
    field.absent = true;
    field.values.assign(volume_.voxel_count(), kInfiniteDistance);
    return;
  }

  Box changed;
  for (std::size_t v : removed) {
    const Index3 p = volume_.unravel(v);
    changed.extend(p[0], p[1], p[2]);
  }
  changed = changed.grown({1, 1, 1}, dims);

  const double eps = 1e-9 * (1.0 + spacing.maxCoeff());
  Box window;
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        const int p[3] = {i, j, k};
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const int gap = std::max({0, changed.lo[a] - p[a], p[a] - changed.hi[a]});
          d2 += (gap * spacing[a]) * (gap * spacing[a]);
        }
        const double old = std::abs(field.values[volume_.linear(i, j, k)]);
        if (old + eps >= std::sqrt(d2)) window.extend(i, j, k);
      }
  Index3 pad;
  for (int a = 0; a < 3; ++a) pad[a] = static_cast<int>(std::ceil(window_pad / spacing[a]));
  window.merge(changed.grown(pad, dims));

  Index3 margin = pad;
  for (;;) {
    const Box outer = window.grown(margin, dims);
    const Index3 ext = outer.extent();
    std::vector<std::uint8_t> sites(static_cast<std::size_t>(ext[0]) * ext[1] * ext[2], 0);
    auto sub = [&](int i, int j, int k) {
      return static_cast<std::size_t>(i - outer.lo[0]) +
             static_cast<std::size_t>(ext[0]) *
                 (static_cast<std::size_t>(j - outer.lo[1]) + static_cast<std::size_t>(ext[1]) * (k - outer.lo[2]));
    };
    for (int k = outer.lo[2]; k <= outer.hi[2]; ++k)
      for (int j = outer.lo[1]; j <= outer.hi[1]; ++j)
        for (int i = outer.lo[0]; i <= outer.hi[0]; ++i)
          if (volume_.is_surface(i, j, k, label)) sites[sub(i, j, k)] = 1;
    const std::vector<double> sq = squared_distance_transform(ext, spacing, sites);

    const bool whole = outer.covers(dims);
    bool certified = true;
    if (!whole) {
      for (int k = window.lo[2]; k <= window.hi[2] && certified; ++k)
        for (int j = window.lo[1]; j <= window.hi[1] && certified; ++j)
          for (int i = window.lo[0]; i <= window.hi[0]; ++i) {
            const int p[3] = {i, j, k};
            double bound = kInfiniteDistance;
            for (int a = 0; a < 3; ++a) {
              if (outer.lo[a] > 0) bound = std::min(bound, (p[a] - outer.lo[a] + 1) * spacing[a]);
              if (outer.hi[a] < dims[a] - 1) bound = std::min(bound, (outer.hi[a] + 1 - p[a]) * spacing[a]);
            }
            if (sq[sub(i, j, k)] > bound * bound) {
              certified = false;
              break;
            }
          }
    }
    if (certified) {
      for (int k = window.lo[2]; k <= window.hi[2]; ++k)
        for (int j = window.lo[1]; j <= window.hi[1]; ++j)
          for (int i = window.lo[0]; i <= window.hi[0]; ++i) {
            const std::size_t v = volume_.linear(i, j, k);
            const double d = std::sqrt(sq[sub(i, j, k)]);
            field.values[v] = (volume_.labels[v] == label && d != 0.0) ? -d : d;
          }
      if (whole) ++result.full_rebuilds;
      return;
    }
    for (int a = 0; a < 3; ++a) margin[a] = std::max(1, margin[a] * 2);
  }
}

}  // namespace codrill::twin
