#include "codrill/twin/structure.hpp"

#include <algorithm>
#include <set>

#include "codrill/common/error.hpp"

namespace codrill::twin {

StructureTable default_structures() {
  return {
      {1, "Facial Nerve", 1.5, 0.8, 3.0, 0.005, true},
      {2, "Tegmen", 1.5, 0.8, 4.0, 0.005, true},
      {3, "Sigmoid", 1.5, 0.8, 2.5, 0.005, true},
      {4, "Cortical", 0.0, 1.3, 5.0, 0.005, false},
      {5, "Trabecular", 0.0, 1.3, 3.5, 0.005, false},
  };
}

void validate_structures(const StructureTable& specs) {
  std::vector<std::string> issues;
  std::set<int> seen;
  for (const auto& s : specs) {
    const std::string tag = "structure[" + std::to_string(s.index) + "]";
    if (s.index < 1 || s.index > 255) issues.push_back(tag + ".index must be in 1..255");
    if (!seen.insert(s.index).second) issues.push_back(tag + ".index is duplicated");
    if (!(s.gamma >= 0.0)) issues.push_back(tag + ".gamma must be >= 0");
    if (!(s.lambda > 0.0)) issues.push_back(tag + ".lambda must be > 0");
    if (!(s.stiffness > 0.0)) issues.push_back(tag + ".stiffness must be > 0");
    if (!(s.damping >= 0.0)) issues.push_back(tag + ".damping must be >= 0");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

const StructureSpec* find_structure(const StructureTable& specs, int index) {
  auto it = std::find_if(specs.begin(), specs.end(), [&](const StructureSpec& s) { return s.index == index; });
  return it == specs.end() ? nullptr : &*it;
}

std::optional<std::size_t> structure_slot(const StructureTable& specs, int index) {
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (specs[i].index == index) return i;
  return std::nullopt;
}

}  // namespace codrill::twin
