#include "codrill/twin/phantom.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "codrill/common/error.hpp"
#include "codrill/common/rng.hpp"

namespace codrill::twin {

namespace {
enum Label : std::uint8_t { kAir = 0, kFacialNerve = 1, kTegmen = 2, kSigmoid = 3, kCortical = 4, kTrabecular = 5 };
}

LabeledVolume generate_phantom(const PhantomSpec& spec) {
  const Eigen::Vector3d spacing = Eigen::Vector3d::Constant(spec.spacing);
  LabeledVolume vol(spec.dims, spacing, Eigen::Vector3d::Zero(), default_structures());
  RandomStream rng(spec.seed, "phantom");
  auto jitter = [&] { return rng.uniform(-spec.jitter, spec.jitter); };

  const Eigen::Vector3d extent = spacing.cwiseProduct(
      Eigen::Vector3d(spec.dims[0] - 1, spec.dims[1] - 1, spec.dims[2] - 1));
  const double cx = 0.5 * extent.x(), cy = 0.5 * extent.y();
  const double top = extent.z() - 3.5;           // bone surface, air above
  const double cortical = 1.5 + 0.2 * jitter();  // shell thickness

  // Mastoid cavity: ellipsoid opening through the top of the block.
  const double scale = extent.x() / 23.5;
  const Eigen::Vector3d cavity_c(cx + jitter(), cy + jitter(), top + 2.0 * scale);
  const Eigen::Vector3d cavity_r(8.0 * scale, 8.0 * scale, 9.0 * scale);

  // Facial nerve: thin canal along y, protruding from the cavity floor.
  const double nerve_x = cavity_c.x() + 2.0 * scale + 0.5 * jitter();
  const double nerve_r = 0.9 * scale * (1.0 + 0.1 * rng.uniform(-1.0, 1.0));
  const double floor_at_nerve =
      cavity_c.z() - cavity_r.z() * std::sqrt(std::max(0.0, 1.0 - std::pow((nerve_x - cavity_c.x()) / cavity_r.x(), 2)));
  const double nerve_z = floor_at_nerve - 0.3 * scale;

  // Sigmoid sinus: wide vessel along y in the posterior wall.
  const double sigmoid_x = cavity_c.x() - 6.5 * scale + 0.5 * jitter();
  const double sigmoid_z = top - 4.0 * scale + 0.5 * jitter();
  const double sigmoid_r = 2.0 * scale * (1.0 + 0.1 * rng.uniform(-1.0, 1.0));

  // Tegmen: bony plate in the opposite wall.
  const double tegmen_x = cavity_c.x() + 6.0 * scale + 0.5 * jitter();
  const double tegmen_z0 = top - 4.5 * scale + 0.5 * jitter();
  const double tegmen_z1 = tegmen_z0 + 1.5 * scale;

  for (int k = 0; k < spec.dims[2]; ++k)
    for (int j = 0; j < spec.dims[1]; ++j)
      for (int i = 0; i < spec.dims[0]; ++i) {
        const Eigen::Vector3d p = vol.center(i, j, k);
        std::uint8_t label = kAir;
        if (p.z() <= top) label = p.z() > top - cortical ? kCortical : kTrabecular;
        const Eigen::Vector3d e = (p - cavity_c).cwiseQuotient(cavity_r);
        if (e.squaredNorm() < 1.0) label = kAir;
        if (p.z() <= top) {
          if (std::hypot(p.x() - nerve_x, p.z() - nerve_z) <= nerve_r) label = kFacialNerve;
          if (std::hypot(p.x() - sigmoid_x, p.z() - sigmoid_z) <= sigmoid_r) label = kSigmoid;
          if (p.x() >= tegmen_x && p.z() >= tegmen_z0 && p.z() <= tegmen_z1) label = kTegmen;
        }
        vol.at(i, j, k) = label;
      }
  return vol;
}

Eigen::Vector3d exposed_surface_point(const LabeledVolume& volume, int index, const Eigen::Vector3d& from) {
  static constexpr std::array<std::array<int, 3>, 6> kNeighbours{
      {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  const auto label = static_cast<std::uint8_t>(index);
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int k = 0; k < volume.dims[2]; ++k)
    for (int j = 0; j < volume.dims[1]; ++j)
      for (int i = 0; i < volume.dims[0]; ++i) {
        if (volume.at(i, j, k) != label) continue;
        bool exposed = false;
        for (const auto& n : kNeighbours) {
          const int a = i + n[0], b = j + n[1], c = k + n[2];
          if (volume.contains(a, b, c) && volume.at(a, b, c) == 0) {
            exposed = true;
            break;
          }
        }
        if (!exposed) continue;
        const Eigen::Vector3d p = volume.center(i, j, k);
        const double d = (p - from).squaredNorm();
        if (d < best) {
          best = d;
          out = p;
        }
      }
  if (!std::isfinite(best))
    throw ConfigurationError("structure " + std::to_string(index) + " has no exposed surface");
  return out;
}

}  // namespace codrill::twin
