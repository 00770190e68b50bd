#include "codrill/robot/admittance.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "codrill/common/error.hpp"

namespace codrill::robot {

Eigen::VectorXd solve_admittance(const Eigen::MatrixXd& j, const Vector6d& gains, double sigma, const Wrench& hand,
                                 const AdmittanceOptions& options) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigurationError("sigma must be positive and finite");
  if (!hand.is_finite()) throw ConfigurationError("hand wrench is not finite");
  if (j.rows() != 6) throw ConfigurationError("Jacobian must have 6 rows");
  if (!(options.damping >= 0.0)) throw ConfigurationError("damping must be >= 0");

  const Vector6d target = sigma * gains.cwiseProduct(hand.vector());
  if (target.isZero(0.0)) return Eigen::VectorXd::Zero(j.cols());

  if (options.damping == 0.0) return j.completeOrthogonalDecomposition().solve(target);

  const double mu2 = options.damping * options.damping;
  if (j.cols() >= 6) {
    Eigen::MatrixXd a = j * j.transpose();
    a.diagonal().array() += mu2;
    return j.transpose() * a.ldlt().solve(target);
  }
  Eigen::MatrixXd a = j.transpose() * j;
  a.diagonal().array() += mu2;
  return a.ldlt().solve(j.transpose() * target);
}

RobotState make_state(const KinematicChain& chain, const Eigen::VectorXd& q) {
  RobotState s;
  s.q = q;
  s.qdot = Eigen::VectorXd::Zero(q.size());
  s.tip_pose = forward_kinematics(chain, q);
  s.at_limit.assign(chain.dof(), false);
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const double qi = q[static_cast<Eigen::Index>(i)];
    s.at_limit[i] = qi <= chain.joints[i].lower || qi >= chain.joints[i].upper;
  }
  return s;
}

RobotState integrate_step(const KinematicChain& chain, const RobotState& state, const Eigen::VectorXd& dq, double dt,
                          double rate_scale) {
  if (!(dt > 0.0)) throw ConfigurationError("dt must be positive");
  if (dq.size() != state.q.size()) throw ConfigurationError("dq size does not match the joint vector");
  RobotState next = state;
  next.qdot = dq * rate_scale;
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double moved = state.q[k] + dq[k] * dt * rate_scale;
    const double clamped = std::clamp(moved, chain.joints[i].lower, chain.joints[i].upper);
    next.at_limit[i] = clamped != moved || clamped == chain.joints[i].lower || clamped == chain.joints[i].upper;
    next.q[k] = clamped;
  }
  if (dq.isZero(0.0)) return next;
  next.tip_pose = forward_kinematics(chain, next.q);
  return next;
}

}  // namespace codrill::robot
