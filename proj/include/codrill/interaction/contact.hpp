#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "codrill/interaction/wrench_transform.hpp"
#include "codrill/twin/anatomy.hpp"

namespace codrill::interaction {

/// Contact with one structure this tick.
struct MaterialContact {
  int index = 0;
  double penetration = 0.0;            ///< -sdf at the tip [mm]
  double effective_penetration = 0.0;  ///< penetration minus pending ablation [mm]
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  ///< outward unit normal (anatomy frame)
  double stiffness = 0.0;              ///< N/mm
  double damping = 0.0;                ///< N*s/mm
  Eigen::Vector3d force = Eigen::Vector3d::Zero();    ///< anatomy frame [N]
  bool normal_fallback = false;
};

struct ContactResult {
  Wrench tip;                          ///< total force on the tool, tip frame
  Eigen::Vector3d world_force = Eigen::Vector3d::Zero();
  std::vector<MaterialContact> contacts;
  bool normal_fallback = false;
};

/// Last valid contact normal per structure slot, used when the SDF gradient
/// vanishes.
struct NormalMemory {
  std::vector<Eigen::Vector3d> normals;
  std::vector<bool> valid;
};

/// Penalty contact: for each structure with sdf < 0 at the tip,
///   F = k p n + b max(0, -v.n) n.
/// `ablation_offsets` (per structure slot, may be empty) is subtracted from the
/// penetration before the spring term.
ContactResult compute_contact_force(const twin::AnatomyModel& anatomy, const Eigen::Vector3d& tip,
                                    const Eigen::Vector3d& velocity, const Eigen::Matrix3d& tip_rotation,
                                    NormalMemory& memory, std::span<const double> ablation_offsets = {});

struct AblationParams {
  double rate = 3.0;            ///< mm/(s*N) removed per newton above the cut threshold
  double cut_threshold = 0.4;   ///< N
  double burr_radius = 1.5;     ///< mm
};

struct AblationStep {
  bool carved = false;
  twin::CarveResult carve;
};

/// Material removal while the drill is powered. Each carvable structure keeps
/// an accumulated depth a_n with da_n/dt = rate * max(0, F_n - cut); the
/// contact uses p_n - a_n. Once a_n reaches half a voxel, a burr-sized sphere
/// reaching a_n below the surface is carved and a_n drops by the measured
/// surface retreat.
class Ablation {
 public:
  Ablation() = default;
  Ablation(AblationParams params, std::size_t structure_count);

  std::span<const double> offsets() const { return offsets_; }
  const AblationParams& params() const { return params_; }

  AblationStep step(twin::AnatomyModel& anatomy, const ContactResult& contact, const Eigen::Vector3d& tip,
                    bool drill_on, double dt);

 private:
  AblationParams params_;
  std::vector<double> offsets_;
};

}  // namespace codrill::interaction
