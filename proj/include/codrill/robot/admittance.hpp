#pragma once

#include <vector>

#include <Eigen/Core>

#include "codrill/robot/kinematics.hpp"
#include "codrill/robot/wrench.hpp"

namespace codrill::robot {

struct AdmittanceOptions {
  double damping = 1e-3;  ///< mu; 0 gives the minimum-norm pseudoinverse solution
};

/// Joint velocity for the adjusted admittance law:
///   dq = argmin |sigma G F_H - J dq|^2 + mu^2 |dq|^2
///      = J^T (J J^T + mu^2 I)^-1 sigma G F_H.
/// `gains` is the diagonal of G. Throws ConfigurationError for sigma <= 0 or a
/// non-finite wrench.
Eigen::VectorXd solve_admittance(const Eigen::MatrixXd& j, const Vector6d& gains, double sigma, const Wrench& hand,
                                 const AdmittanceOptions& options = {});

struct RobotState {
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
  RigidTransform tip_pose;
  std::vector<bool> at_limit;
};

RobotState make_state(const KinematicChain& chain, const Eigen::VectorXd& q);

/// q <- clamp(q + dq * dt * rate_scale, limits); recomputes the tip pose and
/// flags joints held at a limit.
RobotState integrate_step(const KinematicChain& chain, const RobotState& state, const Eigen::VectorXd& dq, double dt,
                          double rate_scale = 1.0);

}  // namespace codrill::robot
