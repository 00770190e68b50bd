#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "codrill/control/controller.hpp"
#include "codrill/interaction/contact.hpp"
#include "codrill/interaction/sensors.hpp"
#include "codrill/robot/admittance.hpp"
#include "codrill/scenario/runlog.hpp"
#include "codrill/scenario/scenario.hpp"
#include "codrill/scenario/trajectory.hpp"
#include "codrill/twin/anatomy.hpp"

namespace codrill::scenario {

/// Source of the operator's hand force, queried once per control tick.
class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual HandCommand next(const HumanObservation& obs, std::uint64_t control_tick) = 0;
};

class ScriptedInput : public InputSource {
 public:
  ScriptedInput(const Scenario& s, const twin::AnatomyModel& anatomy);
  HandCommand next(const HumanObservation& obs, std::uint64_t control_tick) override;
  const ScriptedHuman& human() const { return human_; }

 private:
  ScriptedHuman human_;
};

/// Plays back the recorded F_H and drill flag of each control tick; zero
/// force once the recording ends.
class ReplayInput : public InputSource {
 public:
  explicit ReplayInput(const RunLog& log);
  HandCommand next(const HumanObservation& obs, std::uint64_t control_tick) override;

 private:
  std::vector<HandCommand> commands_;
};

/// Fixed-step multi-rate loop. Every sim tick: contact, ablation and sensor
/// sampling on due ticks. Every control tick: hand input, distance query,
/// force estimate, controller, admittance solve, integration and one record.
class Simulation {
 public:
  Simulation(const Scenario& scenario, std::unique_ptr<InputSource> input);
  Simulation(const Scenario& scenario, twin::LabeledVolume volume, std::unique_ptr<InputSource> input);

  /// Input sources that need the anatomy are attached after construction.
  void set_input(std::unique_ptr<InputSource> input);

  /// Advances one sim tick.
  void step();
  /// Ticks the scenario duration asks for. Live scenarios never finish on their own.
  bool done() const { return !unbounded_ && tick_ >= total_ticks_; }
  void run();

  std::uint64_t tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * sim_dt_; }
  const Scenario& scenario() const { return scenario_; }
  const twin::AnatomyModel& anatomy() const { return anatomy_; }
  const RunLog& log() const { return log_; }
  RunLog take_log() { return std::move(log_); }
  const control::ControllerState& controller_state() const { return controller_; }
  const robot::RobotState& robot_state() const { return robot_; }
  const interaction::ContactResult& contact() const { return contact_; }

 private:
  void control_tick(double t);
  void add_event(double t, std::string kind, int structure, double value, std::string detail);

  Scenario scenario_;
  twin::AnatomyModel anatomy_;
  std::unique_ptr<InputSource> input_;
  robot::RobotState robot_;
  control::ControllerState controller_;
  interaction::Sensor drill_;
  interaction::Sensor wrist_;
  interaction::Ablation ablation_;
  interaction::NormalMemory normals_;
  interaction::ContactResult contact_;
  Eigen::Vector3d tip_velocity_ = Eigen::Vector3d::Zero();
  HandCommand last_command_;
  RunLog log_;
  double sim_dt_ = 0.001;
  double control_dt_ = 0.002;
  std::uint64_t divisor_ = 2;
  std::uint64_t tick_ = 0;
  std::uint64_t total_ticks_ = 0;
  bool unbounded_ = false;
  std::uint64_t control_ticks_ = 0;
};

/// Header for a run of `s` over `volume`.
RunHeader make_header(const Scenario& s, const twin::StructureTable& structures);

/// Runs a scripted or replay scenario to completion. Replay scenarios load
/// the log named by input.log. Live scenarios are rejected.
RunLog run_simulation(const Scenario& s);

/// Re-executes a recorded run: the scenario embedded in the header with the
/// recorded hand input.
RunLog replay_run(const RunLog& recorded);

/// Scenario embedded in a run log header. Throws FormatError if absent.
Scenario scenario_from_log(const RunLog& log);

}  // namespace codrill::scenario
