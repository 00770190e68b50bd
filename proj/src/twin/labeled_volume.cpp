#include "codrill/twin/labeled_volume.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "codrill/common/error.hpp"

namespace codrill::twin {

LabeledVolume::LabeledVolume(Index3 d, Eigen::Vector3d s, Eigen::Vector3d o, StructureTable st)
    : dims(d), spacing(std::move(s)), origin(std::move(o)), structures(std::move(st)) {
  labels.assign(voxel_count(), 0);
}

bool LabeledVolume::is_surface(int i, int j, int k, std::uint8_t label) const {
  if (at(i, j, k) != label) return false;
  static constexpr std::array<std::array<int, 3>, 6> kNeighbours{
      {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  for (const auto& n : kNeighbours) {
    const int a = i + n[0], b = j + n[1], c = k + n[2];
    if (!contains(a, b, c) || at(a, b, c) != label) return true;
  }
  return false;
}

void LabeledVolume::validate() const {
  std::vector<std::string> issues;
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) issues.push_back("dims[" + std::to_string(a) + "] must be positive");
    if (!(spacing[a] > 0.0)) issues.push_back("spacing[" + std::to_string(a) + "] must be positive");
  }
  if (issues.empty() && labels.size() != voxel_count())
    issues.push_back("label storage holds " + std::to_string(labels.size()) + " voxels, dims imply " +
                     std::to_string(voxel_count()));
  try {
    validate_structures(structures);
  } catch (const ValidationError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  std::array<bool, 256> declared{};
  declared[0] = true;
  for (const auto& s : structures)
    if (s.index >= 0 && s.index < 256) declared[s.index] = true;
  std::array<bool, 256> reported{};
  for (auto l : labels) {
    if (!declared[l] && !reported[l]) {
      reported[l] = true;
      issues.push_back("label " + std::to_string(l) + " is not a declared structure");
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::size_t LabeledVolume::count(std::uint8_t label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

}  // namespace codrill::twin
