#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "codrill/control/controller.hpp"
#include "codrill/interaction/contact.hpp"
#include "codrill/interaction/sensors.hpp"
#include "codrill/robot/admittance.hpp"
#include "codrill/robot/kinematics.hpp"
#include "codrill/twin/phantom.hpp"

namespace codrill::scenario {

inline constexpr int kScenarioFormatVersion = 1;

struct Rates {
  double sim = 1000.0;
  double control = 500.0;
  double sensor = 200.0;
};

struct AnatomySource {
  std::optional<std::string> file;       ///< .cdvol path (absolute after loading)
  twin::PhantomSpec phantom;
  bool phantom_seed_from_run = true;     ///< phantom.seed follows the run seed
  nlohmann::json structure_overrides = nlohmann::json::array();
};

struct TremorParams {
  double std = 0.0;       ///< N per axis
  double band_low = 4.0;  ///< Hz
  double band_high = 12.0;
};

/// Simulated operator. Presses are closed on the true tip force seen after a
/// reaction delay; motions are closed on tip position.
struct HumanParams {
  double force_gain = 1.0;      ///< N of hand force per N of force error
  double delay = 0.1;           ///< s
  double max_push = 1.0;        ///< N, default press saturation
  double position_gain = 0.5;   ///< N/mm
  double max_force = 2.0;       ///< N, position-servo saturation
  double variability = 0.0;     ///< relative std of per-segment force and duration
  TremorParams tremor;
};

enum class SegmentType { approach, press, sweep, retract, idle };

std::string_view to_string(SegmentType type);

struct TargetSpec {
  std::optional<Eigen::Vector3d> point;
  std::optional<int> structure;               ///< nearest exposed surface point of this structure
  Eigen::Vector3d from = Eigen::Vector3d::Zero();
  double standoff = 0.0;                      ///< mm along the outward surface normal
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  std::optional<double> via_height;           ///< rise to this z, travel, then descend
};

struct Segment {
  SegmentType type = SegmentType::idle;
  double duration = 0.0;
  bool drill = false;
  double force = 0.0;                          ///< press/sweep target |F_T| [N]
  std::optional<double> push;                  ///< press saturation override [N]
  std::optional<double> gain;                  ///< press force-gain override
  std::optional<Eigen::Vector3d> direction;    ///< press: default into the structure surface or -z;
                                               ///< retract: default back along the last press
  std::optional<int> structure;                ///< structure the press is aimed at (reachability check)
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  ///< sweep anchor velocity [mm/s]
  double distance = 0.0;                       ///< retract distance [mm]
  TargetSpec target;                           ///< approach target
};

struct TrajectorySpec {
  HumanParams human;
  std::vector<Segment> segments;
};

enum class InputKind { scripted, replay, live };

struct LiveParams {
  double max_force = 15.0;       ///< N per component
  double deadman = 0.2;          ///< s without commands before F_H decays
  double decay_time = 0.05;      ///< s, exponential decay constant after the dead-man trips
  double snapshot_rate = 60.0;   ///< Hz
  double max_catch_up = 0.05;    ///< s of simulated time run at once when behind
};

/// Default chain with its base placed so the home tip sits at (12, 12, 25) mm,
/// above the cavity of the default phantom.
robot::KinematicChain default_scene_chain();

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double duration = 0.0;
  Rates rates;
  AnatomySource anatomy;
  robot::KinematicChain chain = default_scene_chain();
  std::optional<std::string> chain_file;
  Eigen::VectorXd initial_q = Eigen::VectorXd::Zero(6);
  robot::AdmittanceOptions admittance;
  control::ControllerParams controller;
  interaction::SensorModel drill_sensor;
  interaction::SensorModel wrist_sensor;
  interaction::AblationParams ablation;
  InputKind input = InputKind::scripted;
  TrajectorySpec trajectory;
  std::optional<std::string> replay_log;
  LiveParams live;

  std::uint64_t sim_ticks() const;
  std::uint64_t control_divisor() const;
};

/// Parses a scenario document. Relative paths resolve against `base_dir`.
/// Throws ValidationError listing every offending field.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Canonical document with every default written out.
nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario(const std::filesystem::path& path);

/// Field-level checks that need no anatomy. Throws ValidationError.
void validate_scenario(const Scenario& s);

/// FNV-1a of the canonical document.
std::uint64_t config_hash(const Scenario& s);

/// Hash of the canonical document without controller.enabled, combined with
/// the seed: runs that differ only in controller enablement share it.
std::string comparison_key(const Scenario& s);

/// Labeled anatomy for the scenario (file or phantom), with overrides applied.
twin::LabeledVolume build_volume(const Scenario& s);

}  // namespace codrill::scenario
