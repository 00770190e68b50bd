#include "codrill/interaction/sensors.hpp"

#include <cmath>

#include "codrill/common/error.hpp"

namespace codrill::interaction {

Sensor::Sensor(SensorModel model, std::uint64_t seed, double sim_rate_hz)
    : model_(std::move(model)), rng_(seed, "sensor:" + model_.id) {
  if (!(model_.rate_hz > 0.0) || !(sim_rate_hz >= model_.rate_hz))
    throw ConfigurationError("sensor '" + model_.id + "' rate must be positive and at most the simulation rate");
  const double ratio = sim_rate_hz / model_.rate_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw ConfigurationError("sensor '" + model_.id + "' rate must divide the simulation rate");
  if (!(model_.noise_std >= 0.0)) throw ConfigurationError("sensor '" + model_.id + "' noise must be >= 0");
  period_ticks_ = static_cast<std::uint64_t>(std::llround(ratio));
  const Eigen::Vector3d dir(rng_.gaussian(), rng_.gaussian(), rng_.gaussian());
  bias_direction_ = dir.normalized();
}

const SensorSample& Sensor::update(std::uint64_t tick, double t, const Wrench& value) {
  if (!due(tick)) return held_;
  Wrench w = value;
  const Eigen::Vector3d noise(rng_.gaussian(), rng_.gaussian(), rng_.gaussian());
  w.force += model_.noise_std * noise + model_.bias_drift * t * bias_direction_;
  held_ = {w, t, tick, true};
  return held_;
}

Wrench drill_sensor_wrench(const Wrench& tip_force, const SensorModel& drill) {
  return transform_wrench(tip_force, drill.mounting.inverse(), Frame::drill_sensor);
}

Wrench wrist_sensor_wrench(const Wrench& hand_world, const Wrench& tip_force, const Eigen::Matrix3d& tip_rotation,
                           const SensorModel& wrist) {
  Wrench out = transform_wrench(tip_force, wrist.mounting.inverse(), Frame::wrist);
  const Eigen::Matrix3d world_to_sensor = (tip_rotation * wrist.mounting.rotation).transpose();
  out.force += world_to_sensor * hand_world.force;
  out.torque += world_to_sensor * hand_world.torque;
  return out;
}

TipForceEstimate estimate_tip_force(const SensorSample& sample, const SensorModel& drill, double now) {
  TipForceEstimate e;
  e.wrench = transform_wrench(sample.wrench, drill.mounting, Frame::tip);
  e.age = now - sample.t;
  e.stale = !sample.valid || e.age > 2.0 / drill.rate_hz + 1e-12;
  return e;
}

}  // namespace codrill::interaction
