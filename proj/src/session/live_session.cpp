#include "codrill/session/live_session.hpp"

#include <cmath>

#include "codrill/common/error.hpp"

namespace codrill::session {

using scenario::HandCommand;

LiveInput::LiveInput(scenario::LiveParams params, double control_dt) : params_(params), control_dt_(control_dt) {}

void LiveInput::submit(const SteerCommand& command, double t) { pending_ = std::make_pair(command, t); }

HandCommand LiveInput::next(const scenario::HumanObservation& obs, std::uint64_t) {
  if (pending_) {
    const auto& [cmd, received] = *pending_;
    held_.force = cmd.force;
    held_.torque = cmd.torque;
    held_.drill = cmd.drill;
    last_received_ = received;
    engaged_ = false;
    pending_.reset();
  } else if (last_received_ && obs.t - *last_received_ > params_.deadman) {
    engaged_ = true;
    const double f = std::exp(-control_dt_ / params_.decay_time);
    held_.force *= f;
    held_.torque *= f;
    held_.drill = false;
    if (held_.force.norm() < 1e-9) held_.force.setZero();
    if (held_.torque.norm() < 1e-9) held_.torque.setZero();
  }
  HandCommand out = held_;
  out.flags = engaged_ ? scenario::kFlagDeadman : 0;
  return out;
}

Pacer::Pacer(double max_catch_up, double time_scale) : max_catch_up_(max_catch_up), time_scale_(time_scale) {}

double Pacer::target(double wall, double sim_now) {
  const double desired = (wall - offset_) * time_scale_;
  if (desired - sim_now <= max_catch_up_) return desired;
  const double lost = desired - sim_now - max_catch_up_;
  offset_ += lost / time_scale_;
  dropped_ += lost;
  return sim_now + max_catch_up_;
}

namespace {

const scenario::Scenario& validated(const scenario::Scenario& s) {
  if (s.input != scenario::InputKind::live)
    throw ConfigurationError("scenario '" + s.name + "' is not a live scenario (input.type must be live)");
  scenario::validate_scenario(s);
  return s;
}

}  // namespace

LiveSession::LiveSession(const scenario::Scenario& s, SessionOptions options) : sim_(validated(s), nullptr) {
  auto input = std::make_unique<LiveInput>(s.live, 1.0 / s.rates.control);
  input_ = input.get();
  sim_.set_input(std::move(input));
  snapshot_rate_ = options.snapshot_rate.value_or(s.live.snapshot_rate);
  if (!(snapshot_rate_ > 0.0 && snapshot_rate_ <= s.rates.sim))
    throw ConfigurationError("snapshot rate must be in (0, sim rate]");

  const auto& volume = sim_.anatomy().volume();
  hello_.session = options.id;
  hello_.scenario = s.name;
  hello_.seed = s.seed;
  hello_.controller_enabled = s.controller.enabled;
  hello_.rates = s.rates;
  hello_.snapshot_rate = snapshot_rate_;
  hello_.max_force = s.live.max_force;
  hello_.deadman = s.live.deadman;
  hello_.sigma_high = s.controller.sigma_high;
  hello_.sigma_contact = s.controller.sigma_contact;
  hello_.sigma_low = s.controller.sigma_low;
  hello_.contact_threshold = s.controller.contact_threshold;
  hello_.margin = s.controller.activation_margin;
  hello_.structures = sim_.anatomy().structures();
  hello_.dims = volume.dims;
  hello_.spacing = volume.spacing.x();
}

SteerCommand LiveSession::submit(const SteerCommand& command) {
  const SteerCommand clamped = clamp(command, sim_.scenario().live.max_force);
  std::lock_guard lock(ingress_mutex_);
  ingress_.push_back(clamped);
  return clamped;
}

void LiveSession::advance_to(double t) {
  if (finished_) throw ConfigurationError("session is finished");
  {
    std::lock_guard lock(ingress_mutex_);
    if (!ingress_.empty()) input_->submit(ingress_.back(), sim_.time());
    ingress_.clear();
  }
  const double sim_rate = sim_.scenario().rates.sim;
  const auto target = static_cast<std::uint64_t>(std::floor(t * sim_rate + 1e-9));
  while (sim_.tick() < target) {
    sim_.step();
    emit_events();
    const auto k = sim_.tick();
    const double ratio = snapshot_rate_ / sim_rate;
    if (std::floor(static_cast<double>(k) * ratio + 1e-9) > std::floor(static_cast<double>(k - 1) * ratio + 1e-9))
      emit_snapshot();
  }
}

void LiveSession::emit_events() {
  const auto& events = sim_.log().events;
  for (; events_sent_ < events.size(); ++events_sent_) outbox_.push_back(event_message(seq_++, events[events_sent_]));
}

void LiveSession::emit_snapshot() {
  const auto& records = sim_.log().records;
  if (records.empty()) return;
  const auto& r = records.back();
  const auto& volume = sim_.anatomy().volume();
  Snapshot s;
  s.seq = seq_++;
  s.t = r.t;
  s.tip = r.tip;
  s.distances = r.distances;
  s.force = r.force_estimate.norm();
  s.hand = r.hand.head<3>();
  s.sigma = r.sigma;
  s.regime = std::string(control::to_string(r.regime));
  s.structure = r.structure;
  s.carved = r.carved;
  s.deadman = (r.flags & scenario::kFlagDeadman) != 0;
  s.slice.origin = Eigen::Vector3d(volume.origin.x(), volume.origin.y(), r.tip.z());
  s.slice.spacing = volume.spacing.x();
  s.slice.nx = volume.dims[0];
  s.slice.ny = volume.dims[1];
  outbox_.push_back(to_json(s));
  last_snapshot_ = std::move(s);
}

std::vector<nlohmann::json> LiveSession::drain() {
  std::vector<nlohmann::json> out;
  out.swap(outbox_);
  return out;
}

scenario::RunLog LiveSession::finish() {
  finished_ = true;
  return sim_.take_log();
}

}  // namespace codrill::session
