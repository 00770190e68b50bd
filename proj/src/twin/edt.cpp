#include "codrill/twin/edt.hpp"

#include <cmath>
#include <limits>

namespace codrill::twin {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void squared_distance_1d(const double* f, int n, std::ptrdiff_t stride, double w, double* out, int* v,
                         double* z) {
  const double w2 = w * w;
  int k = -1;
  for (int q = 0; q < n; ++q) {
    const double fq = f[q * stride];
    if (!std::isfinite(fq)) continue;
    const double hq = fq + (q * w) * (q * w);
    double s = -kInf;
    while (k >= 0) {
      const int p = v[k];
      const double hp = f[p * stride] + (p * w) * (p * w);
      s = (hq - hp) / (2.0 * w2 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = (k == 0) ? -kInf : s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) out[q * stride] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = (q - v[j]) * w;
    out[q * stride] = f[v[j] * stride] + dq * dq;
  }
}

std::vector<double> squared_distance_transform(const Index3& dims, const Eigen::Vector3d& spacing,
                                               std::span<const std::uint8_t> sites) {
  const std::size_t nx = dims[0], ny = dims[1], nz = dims[2];
  const std::size_t total = nx * ny * nz;
  std::vector<double> grid(total);
  for (std::size_t i = 0; i < total; ++i) grid[i] = sites[i] ? 0.0 : kInf;

  const int longest = std::max({dims[0], dims[1], dims[2]});
  std::vector<double> line(longest), result(longest), z(longest + 1);
  std::vector<int> v(longest);

  auto run_axis = [&](int axis) {
    const std::size_t n = dims[axis];
    const std::ptrdiff_t stride = axis == 0 ? 1 : (axis == 1 ? static_cast<std::ptrdiff_t>(nx)
                                                             : static_cast<std::ptrdiff_t>(nx * ny));
    const std::size_t lines = total / n;
    for (std::size_t l = 0; l < lines; ++l) {
      std::size_t start;
      if (axis == 0) {
        start = l * nx;
      } else if (axis == 1) {
        start = (l % nx) + (l / nx) * nx * ny;
      } else {
        start = l;
      }
      for (std::size_t q = 0; q < n; ++q) line[q] = grid[start + q * stride];
      squared_distance_1d(line.data(), static_cast<int>(n), 1, spacing[axis], result.data(), v.data(), z.data());
      for (std::size_t q = 0; q < n; ++q) grid[start + q * stride] = result[q];
    }
  };
  run_axis(0);
  run_axis(1);
  run_axis(2);
  return grid;
}

}  // namespace codrill::twin
