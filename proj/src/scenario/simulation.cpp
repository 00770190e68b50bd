#include "codrill/scenario/simulation.hpp"

#include <cmath>

#include "codrill/common/error.hpp"
#include "codrill/interaction/wrench_transform.hpp"
#include "codrill/robot/kinematics.hpp"

namespace codrill::scenario {

ScriptedInput::ScriptedInput(const Scenario& s, const twin::AnatomyModel& anatomy)
    : human_(generate_trajectory(s.trajectory, s.seed), anatomy, 1.0 / s.rates.control) {}

HandCommand ScriptedInput::next(const HumanObservation& obs, std::uint64_t) { return human_.step(obs); }

ReplayInput::ReplayInput(const RunLog& log) {
  commands_.reserve(log.records.size());
  for (const auto& r : log.records) {
    HandCommand c;
    c.force = r.hand.head<3>();
    c.torque = r.hand.tail<3>();
    c.drill = r.drill;
    c.flags = r.flags & kFlagDeadman;
    commands_.push_back(c);
  }
}

HandCommand ReplayInput::next(const HumanObservation&, std::uint64_t control_tick) {
  if (control_tick < commands_.size()) return commands_[control_tick];
  return {};
}

RunHeader make_header(const Scenario& s, const twin::StructureTable& structures) {
  RunHeader h;
  h.name = s.name;
  h.scenario = scenario_to_json(s);
  h.seed = s.seed;
  h.config_hash = config_hash(s);
  h.comparison_key = comparison_key(s);
  h.controller_enabled = s.controller.enabled;
  h.structures = structures;
  h.rates = s.rates;
  h.record_dt = 1.0 / s.rates.control;
  for (const auto& j : s.chain.joints) h.joints.push_back(j.name);
  return h;
}

Simulation::Simulation(const Scenario& scenario, std::unique_ptr<InputSource> input)
    : Simulation(scenario, build_volume(scenario), std::move(input)) {}

Simulation::Simulation(const Scenario& scenario, twin::LabeledVolume volume, std::unique_ptr<InputSource> input)
    : scenario_(scenario), anatomy_(std::move(volume)), input_(std::move(input)) {
  validate_scenario(scenario_);
  robot_ = robot::make_state(scenario_.chain, scenario_.initial_q);
  controller_ = control::initial_state(scenario_.controller);
  drill_ = interaction::Sensor(scenario_.drill_sensor, scenario_.seed, scenario_.rates.sim);
  wrist_ = interaction::Sensor(scenario_.wrist_sensor, scenario_.seed, scenario_.rates.sim);
  ablation_ = interaction::Ablation(scenario_.ablation, anatomy_.structures().size());
  sim_dt_ = 1.0 / scenario_.rates.sim;
  control_dt_ = 1.0 / scenario_.rates.control;
  divisor_ = scenario_.control_divisor();
  total_ticks_ = scenario_.sim_ticks();
  unbounded_ = scenario_.input == InputKind::live;
  log_.header = make_header(scenario_, anatomy_.structures());
}

void Simulation::add_event(double t, std::string kind, int structure, double value, std::string detail) {
  log_.events.push_back({t, std::move(kind), structure, value, std::move(detail)});
}

void Simulation::run() {
  while (!done()) step();
}

void Simulation::set_input(std::unique_ptr<InputSource> input) { input_ = std::move(input); }

void Simulation::step() {
  if (!input_) throw ConfigurationError("simulation needs an input source");
  const double t = time();
  const Eigen::Vector3d tip = robot_.tip_pose.translation;
  const Eigen::Matrix3d& rotation = robot_.tip_pose.rotation;

  contact_ = interaction::compute_contact_force(anatomy_, tip, tip_velocity_, rotation, normals_, ablation_.offsets());
  const auto ablation = ablation_.step(anatomy_, contact_, tip, last_command_.drill, sim_dt_);
  if (ablation.carved && ablation.carve.breach) {
    int critical = 0;
    for (const auto& c : contact_.contacts) {
      const auto* s = twin::find_structure(anatomy_.structures(), c.index);
      if (s != nullptr && s->critical) critical = s->index;
    }
    add_event(t, "breach", critical, static_cast<double>(ablation.carve.removed), "burr reached a critical structure");
  }

  const robot::Wrench tip_force = contact_.tip;
  drill_.update(tick_, t, interaction::drill_sensor_wrench(tip_force, scenario_.drill_sensor));
  robot::Wrench hand = robot::Wrench::zero(robot::Frame::world);
  hand.force = last_command_.force;
  hand.torque = last_command_.torque;
  wrist_.update(tick_, t, interaction::wrist_sensor_wrench(hand, tip_force, rotation, scenario_.wrist_sensor));

  if (tick_ % divisor_ == 0) control_tick(t);
  ++tick_;
}

void Simulation::control_tick(double t) {
  const Eigen::Vector3d tip = robot_.tip_pose.translation;
  const Eigen::Matrix3d& rotation = robot_.tip_pose.rotation;

  HumanObservation obs{t, tip, contact_.world_force};
  HandCommand cmd = input_->next(obs, control_ticks_);
  if (!cmd.force.allFinite() || !cmd.torque.allFinite())
    throw ConfigurationError("input produced a non-finite hand wrench");
  last_command_ = cmd;

  const auto query = anatomy_.query(tip);
  const auto estimate = interaction::estimate_tip_force(drill_.held(), scenario_.drill_sensor, t);
  const double force = estimate.wrench.force.norm();

  control::ControllerInputs inputs{force, query.distances, t};
  auto result = control::step_controller(inputs, controller_, scenario_.controller, anatomy_.structures());
  controller_ = result.state;
  for (const auto& e : result.events) {
    std::string detail(control::to_string(e.regime));
    add_event(e.t, std::string(control::to_string(e.kind)), e.structure.value_or(0), e.sigma, std::move(detail));
  }

  // Hand force seen by the wrist sensor once the drill-sensor tip force is
  // taken out, rotated into the anatomy frame.
  const auto& wrist_model = scenario_.wrist_sensor;
  const robot::Wrench tip_in_wrist =
      interaction::transform_wrench(estimate.wrench, wrist_model.mounting.inverse(), robot::Frame::wrist);
  const Eigen::Matrix3d sensor_to_world = rotation * wrist_model.mounting.rotation;
  robot::Wrench hand_measured = robot::Wrench::zero(robot::Frame::world);
  if (wrist_.held().valid) {
    hand_measured.force = sensor_to_world * (wrist_.held().wrench.force - tip_in_wrist.force);
    hand_measured.torque = sensor_to_world * (wrist_.held().wrench.torque - tip_in_wrist.torque);
  }

  RunRecord r;
  r.t = t;
  r.q = robot_.q;
  r.tip = tip;
  r.tip_rpy = robot::rpy_from_rotation(rotation);
  r.hand.head<3>() = cmd.force;
  r.hand.tail<3>() = cmd.torque;
  r.force_true = contact_.tip.force;
  r.force_estimate = estimate.wrench.force;
  r.distances = query.distances;
  r.sigma = result.sigma;
  r.regime = controller_.regime;
  r.structure = controller_.structure.value_or(0);
  r.drill = cmd.drill;
  r.flags = cmd.flags;
  if (contact_.normal_fallback) r.flags |= kFlagNormalFallback;
  if (query.out_of_bounds) r.flags |= kFlagOutOfBounds;
  if (estimate.stale) r.flags |= kFlagStaleEstimate;
  if (controller_.structure_fallback) r.flags |= kFlagStructureFallback;
  for (bool b : robot_.at_limit)
    if (b) r.flags |= kFlagJointLimit;
  r.carved = anatomy_.total_removed();
  log_.records.push_back(std::move(r));

  const Eigen::MatrixXd j = robot::jacobian(scenario_.chain, robot_.q);
  const Eigen::VectorXd dq = robot::solve_admittance(j, scenario_.chain.gains, result.sigma, hand_measured,
                                                     scenario_.admittance);
  robot_ = robot::integrate_step(scenario_.chain, robot_, dq, control_dt_);
  tip_velocity_ = (j * robot_.qdot).head<3>();
  ++control_ticks_;
}

RunLog run_simulation(const Scenario& s) {
  validate_scenario(s);
  switch (s.input) {
    case InputKind::live:
      throw ConfigurationError("live scenarios run through the session service, not batch mode");
    case InputKind::replay: {
      const RunLog recorded = load_runlog(*s.replay_log);
      Simulation sim(s, std::make_unique<ReplayInput>(recorded));
      sim.run();
      return sim.take_log();
    }
    case InputKind::scripted:
      break;
  }
  Simulation sim(s, nullptr);
  check_press_reachability(s.trajectory, sim.anatomy());
  sim.set_input(std::make_unique<ScriptedInput>(s, sim.anatomy()));
  sim.run();
  return sim.take_log();
}

Scenario scenario_from_log(const RunLog& log) {
  if (log.header.scenario.is_null()) throw FormatError("run log carries no scenario; it cannot be replayed");
  return scenario_from_json(log.header.scenario);
}

RunLog replay_run(const RunLog& recorded) {
  Scenario s = scenario_from_log(recorded);
  const std::uint64_t ticks = recorded.records.size() * s.control_divisor();
  Simulation sim(s, std::make_unique<ReplayInput>(recorded));
  while (sim.tick() < ticks) sim.step();
  RunLog out = sim.take_log();
  out.header = recorded.header;
  return out;
}

}  // namespace codrill::scenario
