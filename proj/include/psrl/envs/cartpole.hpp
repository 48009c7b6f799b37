#pragma once

#include "psrl/envs/env.hpp"

namespace psrl::envs {

// Cart-pole with a continuous force and additive Gaussian transition noise.
// State (x, xdot, theta, thetadot), theta = 0 upright; explicit Euler at dt.
// Reward (1 + cos(theta)) / 2 in [0, 1]: the smooth upright bonus. Episodes
// never terminate early; the angle is left unwrapped so dynamics stay smooth.
class StochasticCartpole : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kPoleHalfLength = 0.5;
  static constexpr double kDt = 0.02;
  static constexpr double kForceMax = 10.0;

  explicit StochasticCartpole(double sigma_f = 0.1, double sigma_r = 0.1, int horizon = 200);

  Eigen::VectorXd sample_initial(std::mt19937_64& rng) const override;
  Eigen::VectorXd mean_dynamics(const Eigen::VectorXd& s,
                                const Eigen::VectorXd& a) const override;
  double mean_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const override;

  // Closed (theta, thetadot) subsystem under force f: theta'' is independent
  // of (x, xdot), so planning in the angle pair alone is exact.
  static Eigen::Vector2d angle_step(const Eigen::Vector2d& angle_state, double force);
};

}  // namespace psrl::envs
