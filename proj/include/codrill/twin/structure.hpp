#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace codrill::twin {

/// Per-structure safety profile and contact material.
struct StructureSpec {
  int index = 0;         ///< label value in the volume (1..255)
  std::string name;
  double gamma = 0.0;    ///< proximity threshold [mm]
  double lambda = 1.0;   ///< safe-force (activation) threshold [N]
  double stiffness = 1.0;  ///< contact stiffness [N/mm]
  double damping = 0.0;    ///< contact damping [N s/mm]
  bool critical = false;   ///< critical structures are never carved

  bool carvable() const { return !critical; }
};

using StructureTable = std::vector<StructureSpec>;

/// Five-structure temporal bone table: facial nerve, tegmen, sigmoid,
/// cortical and trabecular bone. Thresholds follow the clinical pilot values;
/// stiffness and damping are simulator defaults.
StructureTable default_structures();

/// Throws ValidationError listing every violated invariant.
void validate_structures(const StructureTable& specs);

const StructureSpec* find_structure(const StructureTable& specs, int index);

/// Position of `index` in `specs`, or nullopt.
std::optional<std::size_t> structure_slot(const StructureTable& specs, int index);

}  // namespace codrill::twin
