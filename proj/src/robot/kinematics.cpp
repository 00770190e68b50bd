#include "codrill/robot/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "codrill/common/error.hpp"
#include "codrill/robot/wrench.hpp"

namespace codrill::robot {

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::tip: return "tip";
    case Frame::wrist: return "wrist";
    case Frame::drill_sensor: return "drill_sensor";
    case Frame::world: return "world";
  }
  return "unknown";
}

namespace {

RigidTransform joint_motion(const Joint& joint, double q) {
  if (joint.type == JointType::prismatic) return RigidTransform::from_translation(joint.axis * q);
  return RigidTransform::from_rotation(Eigen::AngleAxisd(q, joint.axis).toRotationMatrix());
}

void check_size(const KinematicChain& chain, const Eigen::VectorXd& q) {
  if (static_cast<std::size_t>(q.size()) != chain.dof())
    throw ConfigurationError("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                             std::to_string(chain.dof()));
}

Eigen::Vector3d vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigurationError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void KinematicChain::validate() const {
  std::vector<std::string> issues;
  if (joints.size() < 3) issues.push_back("chain needs at least 3 joints");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const auto& jt = joints[i];
    const std::string tag = "joints[" + std::to_string(i) + "]";
    if (!(jt.lower < jt.upper)) issues.push_back(tag + ".limits: lower must be below upper");
    if (std::abs(jt.axis.norm() - 1.0) > 1e-9) issues.push_back(tag + ".axis must be a unit vector");
    if (!jt.origin.is_rigid()) issues.push_back(tag + ".origin is not a rigid transform");
  }
  if (!tip.is_rigid()) issues.push_back("tip is not a rigid transform");
  if (!base.is_rigid()) issues.push_back("base is not a rigid transform");
  for (int i = 0; i < 6; ++i)
    if (!(gains[i] > 0.0)) issues.push_back("gains[" + std::to_string(i) + "] must be > 0");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

Eigen::VectorXd KinematicChain::lower_limits() const {
  Eigen::VectorXd v(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) v[static_cast<Eigen::Index>(i)] = joints[i].lower;
  return v;
}

Eigen::VectorXd KinematicChain::upper_limits() const {
  Eigen::VectorXd v(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) v[static_cast<Eigen::Index>(i)] = joints[i].upper;
  return v;
}

KinematicChain default_chain() {
  using std::numbers::pi;
  const double deg = pi / 180.0;
  KinematicChain c;
  c.joints = {
      {"x", JointType::prismatic, {}, Eigen::Vector3d::UnitX(), -80.0, 80.0},
      {"y", JointType::prismatic, {}, Eigen::Vector3d::UnitY(), -80.0, 80.0},
      {"z", JointType::prismatic, {}, Eigen::Vector3d::UnitZ(), -80.0, 80.0},
      {"yaw", JointType::revolute, RigidTransform::from_translation({0, 0, -40}), Eigen::Vector3d::UnitZ(),
       -170 * deg, 170 * deg},
      {"pitch", JointType::revolute, RigidTransform::from_translation({0, 0, -30}), Eigen::Vector3d::UnitY(),
       -60 * deg, 60 * deg},
      {"roll", JointType::revolute, RigidTransform::from_translation({0, 0, -30}), Eigen::Vector3d::UnitX(),
       -170 * deg, 170 * deg},
  };
  c.tip = RigidTransform::from_translation({0, 0, -100});
  return c;
}

RigidTransform transform_from_json(const nlohmann::json& j) {
  const Eigen::Vector3d xyz = j.contains("xyz") ? vec3(j.at("xyz")) : Eigen::Vector3d::Zero();
  const Eigen::Vector3d rpy = j.contains("rpy") ? vec3(j.at("rpy")) : Eigen::Vector3d::Zero();
  return RigidTransform::from_rpy(xyz, rpy);
}

Eigen::Vector3d rpy_from_rotation(const Eigen::Matrix3d& r) {
  // Inverse of R = Rz(yaw) Ry(pitch) Rx(roll).
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

nlohmann::json transform_to_json(const RigidTransform& t) {
  const Eigen::Vector3d rpy = rpy_from_rotation(t.rotation);
  return {{"xyz", {t.translation.x(), t.translation.y(), t.translation.z()}}, {"rpy", {rpy.x(), rpy.y(), rpy.z()}}};
}

KinematicChain chain_from_json(const nlohmann::json& j) {
  KinematicChain c;
  try {
    for (const auto& jj : j.at("joints")) {
      Joint joint;
      joint.name = jj.value("name", std::string{});
      const auto type = jj.at("type").get<std::string>();
      if (type == "prismatic") joint.type = JointType::prismatic;
      else if (type == "revolute") joint.type = JointType::revolute;
      else throw ConfigurationError("unknown joint type '" + type + "'");
      joint.axis = vec3(jj.at("axis"));
      if (jj.contains("origin")) joint.origin = transform_from_json(jj.at("origin"));
      const auto& lim = jj.at("limits");
      joint.lower = lim.at(0).get<double>();
      joint.upper = lim.at(1).get<double>();
      c.joints.push_back(joint);
    }
    c.tip = transform_from_json(j.at("tip"));
    if (j.contains("base")) c.base = transform_from_json(j.at("base"));
    if (j.contains("gains")) {
      const auto& g = j.at("gains");
      if (!g.is_array() || g.size() != 6) throw ConfigurationError("gains must have 6 entries");
      for (int i = 0; i < 6; ++i) c.gains[i] = g[static_cast<std::size_t>(i)].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("chain definition: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json chain_to_json(const KinematicChain& chain) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& jt : chain.joints) {
    joints.push_back({{"name", jt.name},
                      {"type", jt.type == JointType::prismatic ? "prismatic" : "revolute"},
                      {"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}},
                      {"origin", transform_to_json(jt.origin)},
                      {"limits", {jt.lower, jt.upper}}});
  }
  nlohmann::json gains = nlohmann::json::array();
  for (int i = 0; i < 6; ++i) gains.push_back(chain.gains[i]);
  return {{"joints", joints},
          {"tip", transform_to_json(chain.tip)},
          {"base", transform_to_json(chain.base)},
          {"gains", gains}};
}

KinematicChain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open chain file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("chain file " + path.string() + ": " + e.what());
  }
  return chain_from_json(j);
}

RigidTransform forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_size(chain, q);
  RigidTransform t = chain.base;
  for (std::size_t i = 0; i < chain.dof(); ++i)
    t = t * chain.joints[i].origin * joint_motion(chain.joints[i], q[static_cast<Eigen::Index>(i)]);
  return t * chain.tip;
}

Eigen::MatrixXd jacobian(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_size(chain, q);
  const auto m = static_cast<Eigen::Index>(chain.dof());
  std::vector<Eigen::Vector3d> axes(chain.dof()), points(chain.dof());
  RigidTransform t = chain.base;
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    t = t * chain.joints[i].origin;
    axes[i] = t.rotation * chain.joints[i].axis;
    points[i] = t.translation;
    t = t * joint_motion(chain.joints[i], q[static_cast<Eigen::Index>(i)]);
  }
  const Eigen::Vector3d tip = (t * chain.tip).translation;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(6, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (chain.joints[k].type == JointType::prismatic) {
      j.block<3, 1>(0, i) = axes[k];
    } else {
      j.block<3, 1>(0, i) = axes[k].cross(tip - points[k]);
      j.block<3, 1>(3, i) = axes[k];
    }
  }
  return j;
}

}  // namespace codrill::robot
