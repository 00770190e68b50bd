#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include <Eigen/Core>

#include "codrill/scenario/scenario.hpp"
#include "codrill/twin/anatomy.hpp"

namespace codrill::scenario {

/// One segment after seeded jitter, placed on the time axis.
struct PlannedSegment {
  Segment segment;
  double start = 0.0;
  double end = 0.0;
  double force = 0.0;  ///< jittered target |F_T|
  double push = 0.0;   ///< press saturation [N]
  double gain = 0.0;   ///< press force gain
};

struct TremorComponent {
  double frequency = 0.0;  ///< Hz
  double phase = 0.0;
  double amplitude = 0.0;  ///< N
};

/// Parametric hand-force plan: jittered segments plus per-axis tremor.
struct HandForceTrajectory {
  HumanParams human;
  std::vector<PlannedSegment> segments;
  std::array<std::vector<TremorComponent>, 3> tremor;

  double duration() const { return segments.empty() ? 0.0 : segments.back().end; }
  /// Index of the segment active at t, or -1 once the plan is over.
  int segment_at(double t) const;
  Eigen::Vector3d tremor_at(double t) const;
};

inline constexpr int kTremorComponents = 8;

/// Deterministic in (spec, seed). An empty spec yields an empty plan.
/// Variability jitters the force and duration of press and sweep segments.
HandForceTrajectory generate_trajectory(const TrajectorySpec& spec, std::uint64_t seed);

struct HandCommand {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   ///< anatomy frame [N]
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  ///< anatomy frame [N*mm]
  bool drill = false;
  std::uint8_t flags = 0;  ///< RecordFlag bits contributed by the source
};

struct HumanObservation {
  double t = 0.0;
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();
  Eigen::Vector3d tip_force = Eigen::Vector3d::Zero();  ///< true contact force, anatomy frame
};

/// Closed-loop operator that realises a trajectory: presses servo the true
/// contact magnitude seen after the reaction delay, motions servo tip position.
class ScriptedHuman {
 public:
  /// `anatomy` resolves structure targets and press directions up front.
  ScriptedHuman(HandForceTrajectory trajectory, const twin::AnatomyModel& anatomy, double control_dt);

  HandCommand step(const HumanObservation& obs);

  const HandForceTrajectory& trajectory() const { return trajectory_; }
  /// Resolved approach target of segment i (anatomy frame).
  const Eigen::Vector3d& target(std::size_t i) const { return targets_[i]; }
  const Eigen::Vector3d& press_direction(std::size_t i) const { return directions_[i]; }

 private:
  double delayed_force(double t) const;

  HandForceTrajectory trajectory_;
  double control_dt_ = 0.002;
  std::vector<Eigen::Vector3d> targets_;
  std::vector<Eigen::Vector3d> directions_;
  std::vector<bool> has_target_;
  std::deque<std::pair<double, double>> history_;  ///< (t, |F_T|)
  int current_ = -2;
  Eigen::Vector3d anchor_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d start_tip_ = Eigen::Vector3d::Zero();
  int stage_ = 0;
};

/// Throws ValidationError listing every press aimed at a critical structure
/// whose target force needs a deeper penetration (force / stiffness) than the
/// structure offers.
void check_press_reachability(const TrajectorySpec& spec, const twin::AnatomyModel& anatomy);

}  // namespace codrill::scenario
