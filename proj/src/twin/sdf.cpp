#include "codrill/twin/sdf.hpp"

#include <algorithm>
#include <cmath>

#include "codrill/twin/edt.hpp"

namespace codrill::twin {

const StructureField* SdfSet::field(int index) const {
  for (const auto& f : fields)
    if (f.index == index) return &f;
  return nullptr;
}

StructureField* SdfSet::field(int index) {
  for (auto& f : fields)
    if (f.index == index) return &f;
  return nullptr;
}

bool SdfSet::any_absent() const {
  return std::any_of(fields.begin(), fields.end(), [](const StructureField& f) { return f.absent; });
}

StructureField build_structure_field(const LabeledVolume& volume, int index) {
  StructureField field;
  field.index = index;
  const auto label = static_cast<std::uint8_t>(index);
  const std::size_t total = volume.voxel_count();
  std::vector<std::uint8_t> sites(total, 0);
  bool any = false;
  for (int k = 0; k < volume.dims[2]; ++k)
    for (int j = 0; j < volume.dims[1]; ++j)
      for (int i = 0; i < volume.dims[0]; ++i)
        if (volume.is_surface(i, j, k, label)) {
          sites[volume.linear(i, j, k)] = 1;
          any = true;
        }
  if (!any) {
    field.absent = true;
    field.values.assign(total, kInfiniteDistance);
    return field;
  }
  field.values = squared_distance_transform(volume.dims, volume.spacing, sites);
  for (std::size_t v = 0; v < total; ++v) {
    const double d = std::sqrt(field.values[v]);
    field.values[v] = (volume.labels[v] == label && d != 0.0) ? -d : d;
  }
  return field;
}

SdfSet build_sdf(const LabeledVolume& volume) {
  volume.validate();
  SdfSet sdf;
  sdf.dims = volume.dims;
  sdf.spacing = volume.spacing;
  sdf.origin = volume.origin;
  sdf.fields.reserve(volume.structures.size());
  for (const auto& s : volume.structures) sdf.fields.push_back(build_structure_field(volume, s.index));
  return sdf;
}

namespace {

struct Cell {
  int i0, j0, k0;
  double fx, fy, fz;
  bool clamped;
  Eigen::Vector3d point;
};

Cell locate(const SdfSet& sdf, const Eigen::Vector3d& p) {
  Cell c{};
  c.clamped = false;
  Eigen::Vector3d u = (p - sdf.origin).cwiseQuotient(sdf.spacing);
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double hi = static_cast<double>(sdf.dims[a] - 1);
    double x = u[a];
    if (!std::isfinite(x)) x = 0.0;
    if (x < 0.0 || x > hi) {
      c.clamped = true;
      x = std::clamp(x, 0.0, hi);
    }
    u[a] = x;
    int b = static_cast<int>(std::floor(x));
    if (sdf.dims[a] >= 2) b = std::min(b, sdf.dims[a] - 2);
    else b = 0;
    base[a] = b;
    frac[a] = sdf.dims[a] >= 2 ? x - b : 0.0;
  }
  c.i0 = base[0];
  c.j0 = base[1];
  c.k0 = base[2];
  c.fx = frac[0];
  c.fy = frac[1];
  c.fz = frac[2];
  c.point = sdf.origin + sdf.spacing.cwiseProduct(u);
  return c;
}

double trilinear(const SdfSet& sdf, const std::vector<double>& values, const Cell& c) {
  const std::size_t nx = sdf.dims[0], ny = sdf.dims[1];
  const int di = sdf.dims[0] >= 2 ? 1 : 0;
  const int dj = sdf.dims[1] >= 2 ? 1 : 0;
  const int dk = sdf.dims[2] >= 2 ? 1 : 0;
  auto at = [&](int i, int j, int k) { return values[i + nx * (j + ny * static_cast<std::size_t>(k))]; };
  const double v000 = at(c.i0, c.j0, c.k0), v100 = at(c.i0 + di, c.j0, c.k0);
  const double v010 = at(c.i0, c.j0 + dj, c.k0), v110 = at(c.i0 + di, c.j0 + dj, c.k0);
  const double v001 = at(c.i0, c.j0, c.k0 + dk), v101 = at(c.i0 + di, c.j0, c.k0 + dk);
  const double v011 = at(c.i0, c.j0 + dj, c.k0 + dk), v111 = at(c.i0 + di, c.j0 + dj, c.k0 + dk);
  auto lerp = [](double a, double b, double t) {
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    return a * (1.0 - t) + b * t;
  };
  const double c00 = lerp(v000, v100, c.fx), c10 = lerp(v010, v110, c.fx);
  const double c01 = lerp(v001, v101, c.fx), c11 = lerp(v011, v111, c.fx);
  const double c0 = lerp(c00, c10, c.fy), c1 = lerp(c01, c11, c.fy);
  return lerp(c0, c1, c.fz);
}

}  // namespace

double interpolate(const SdfSet& sdf, const StructureField& field, const Eigen::Vector3d& p, bool* out_of_bounds) {
  const Cell c = locate(sdf, p);
  if (out_of_bounds) *out_of_bounds = c.clamped;
  if (field.absent) return kInfiniteDistance;
  return trilinear(sdf, field.values, c);
}

DistanceQuery query_distances(const SdfSet& sdf, const Eigen::Vector3d& tip) {
  DistanceQuery q;
  const Cell c = locate(sdf, tip);
  q.out_of_bounds = c.clamped;
  q.clamped_point = c.point;
  q.distances.reserve(sdf.fields.size());
  for (const auto& f : sdf.fields) {
    const double d = f.absent ? kInfiniteDistance : trilinear(sdf, f.values, c);
    q.distances.push_back(d);
    if (std::isfinite(d) && (!q.nearest || d < q.min_distance || (d == q.min_distance && f.index < *q.nearest))) {
      q.min_distance = d;
      q.nearest = f.index;
    }
  }
  return q;
}

Eigen::Vector3d gradient(const SdfSet& sdf, const StructureField& field, const Eigen::Vector3d& p) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  if (field.absent) return g;
  for (int a = 0; a < 3; ++a) {
    const double h = 0.5 * sdf.spacing[a];
    Eigen::Vector3d lo = p, hi = p;
    lo[a] -= h;
    hi[a] += h;
    g[a] = (interpolate(sdf, field, hi) - interpolate(sdf, field, lo)) / (2.0 * h);
  }
  return g;
}

}  // namespace codrill::twin
