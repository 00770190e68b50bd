#pragma once

#include <string_view>

#include <Eigen/Core>

namespace codrill::robot {

enum class Frame { tip, wrist, drill_sensor, world };

std::string_view to_string(Frame frame);

/// Force [N] and torque [N*mm] expressed in `frame`.
struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();
  Frame frame = Frame::world;

  static Wrench zero(Frame frame = Frame::world) { return {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), frame}; }

  bool is_finite() const { return force.allFinite() && torque.allFinite(); }

  /// Stacked [force; torque].
  Eigen::Matrix<double, 6, 1> vector() const {
    Eigen::Matrix<double, 6, 1> v;
    v << force, torque;
    return v;
  }
};

}  // namespace codrill::robot
