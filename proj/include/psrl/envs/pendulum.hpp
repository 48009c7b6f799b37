#pragma once

#include "psrl/envs/env.hpp"

namespace psrl::envs {

// Pendulum swing-up. State (cos(theta), sin(theta), thetadot) with theta = 0
// upright; dynamics recover theta via atan2, so the mean map stays a smooth
// function of the observed state even after additive noise. Torque in [-2, 2],
// semi-implicit Euler (angular velocity updated first, clipped to +-8), reward
// -(wrap(theta)^2 + 0.1 thetadot^2 + 0.001 u^2). Starts near hanging.
class PendulumSwingUp : public Environment {
 public:
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;

  explicit PendulumSwingUp(double sigma_f = 0.1, double sigma_r = 0.1, int horizon = 200);

  Eigen::VectorXd sample_initial(std::mt19937_64& rng) const override;
  Eigen::VectorXd mean_dynamics(const Eigen::VectorXd& s,
                                const Eigen::VectorXd& a) const override;
  double mean_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const override;

  static double wrap_angle(double theta);  // to (-pi, pi]
};

}  // namespace psrl::envs
