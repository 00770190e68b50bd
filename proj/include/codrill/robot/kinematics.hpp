#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "codrill/twin/rigid_transform.hpp"

namespace codrill::robot {

using twin::RigidTransform;
using Vector6d = Eigen::Matrix<double, 6, 1>;

enum class JointType { revolute, prismatic };

struct Joint {
  std::string name;
  JointType type = JointType::revolute;
  RigidTransform origin;                        ///< parent frame -> joint frame at q = 0
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  ///< unit, in the joint frame
  double lower = -1.0;                          ///< rad or mm
  double upper = 1.0;
};

/// Serial chain. The tip pose in anatomy coordinates is
///   base * prod_i (origin_i * motion_i(q_i)) * tip
/// where `base` is the robot-to-anatomy registration.
struct KinematicChain {
  std::vector<Joint> joints;
  RigidTransform tip;
  RigidTransform base;
  /// Admittance gain diagonal: mm/(s*N) for force, rad/(s*N*mm) for torque.
  Vector6d gains = (Vector6d() << 2.0, 2.0, 2.0, 1e-3, 1e-3, 1e-3).finished();

  std::size_t dof() const { return joints.size(); }

  /// Throws ValidationError listing every problem.
  void validate() const;

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
};

/// Generic 6-DOF arm: a Cartesian x/y/z stage (+-80 mm) carrying a
/// yaw (z), pitch (y, +-60 deg), roll (x) wrist, with the drill tip 100 mm
/// below the roll joint. At q = 0 and identity base the tip sits at
/// (0, 0, -200) mm with identity orientation and the tool pointing along -z.
KinematicChain default_chain();

/// Chain file (JSON):
///   {"joints": [{"name": "x", "type": "prismatic" | "revolute",
///                "axis": [x, y, z], "origin": {"xyz": [mm], "rpy": [rad]},
///                "limits": [lower, upper]}, ...],
///    "tip":  {"xyz": [...], "rpy": [...]},
///    "base": {"xyz": [...], "rpy": [...]},       (optional)
///    "gains": [gx, gy, gz, grx, gry, grz]}       (optional)
KinematicChain chain_from_json(const nlohmann::json& j);
nlohmann::json chain_to_json(const KinematicChain& chain);
KinematicChain load_chain(const std::filesystem::path& path);

RigidTransform transform_from_json(const nlohmann::json& j);
nlohmann::json transform_to_json(const RigidTransform& t);

/// Fixed-axis roll, pitch, yaw of a rotation.
Eigen::Vector3d rpy_from_rotation(const Eigen::Matrix3d& r);

/// Tip pose in the anatomy frame.
RigidTransform forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q);

/// Geometric Jacobian (6 x m), rows [linear; angular], in the anatomy frame,
/// referenced at the tip.
Eigen::MatrixXd jacobian(const KinematicChain& chain, const Eigen::VectorXd& q);

}  // namespace codrill::robot
