#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "codrill/common/rng.hpp"
#include "codrill/interaction/wrench_transform.hpp"

namespace codrill::interaction {

struct SensorModel {
  std::string id = "drill";
  double rate_hz = 200.0;
  double noise_std = 0.0;    ///< N, per force component
  double bias_drift = 0.0;   ///< N/s along a fixed seeded direction
  RigidTransform mounting;   ///< sensor frame -> tip frame
};

struct SensorSample {
  Wrench wrench;
  double t = 0.0;
  std::uint64_t tick = 0;
  bool valid = false;
};

/// Zero-order-hold sampled sensor driven by the simulation tick counter.
class Sensor {
 public:
  Sensor() = default;
  /// Throws ConfigurationError unless the rate divides the simulation rate.
  Sensor(SensorModel model, std::uint64_t seed, double sim_rate_hz);

  const SensorModel& model() const { return model_; }
  std::uint64_t period_ticks() const { return period_ticks_; }
  bool due(std::uint64_t tick) const { return tick % period_ticks_ == 0; }

  /// On a due tick, samples `value` (already in the sensor frame) plus noise
  /// and bias; otherwise keeps the held sample. Returns the held sample.
  const SensorSample& update(std::uint64_t tick, double t, const Wrench& value);

  const SensorSample& held() const { return held_; }

 private:
  SensorModel model_;
  std::uint64_t period_ticks_ = 1;
  RandomStream rng_;
  Eigen::Vector3d bias_direction_ = Eigen::Vector3d::UnitX();
  SensorSample held_;
};

/// F_D: the tip force as seen by the drill sensor.
Wrench drill_sensor_wrench(const Wrench& tip_force, const SensorModel& drill);

/// F_W: hand force plus the tip reaction, both seen in the wrist sensor frame.
/// `tip_rotation` maps tip-frame vectors to the anatomy frame.
Wrench wrist_sensor_wrench(const Wrench& hand_world, const Wrench& tip_force, const Eigen::Matrix3d& tip_rotation,
                           const SensorModel& wrist);

struct TipForceEstimate {
  Wrench wrench;       ///< tip frame
  double age = 0.0;    ///< s since the sample was taken
  bool stale = false;  ///< older than two sensor periods
};

/// Inverse mounting transform of the held drill-sensor sample.
TipForceEstimate estimate_tip_force(const SensorSample& sample, const SensorModel& drill, double now);

}  // namespace codrill::interaction
