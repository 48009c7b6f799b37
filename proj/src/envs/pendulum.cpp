#include "psrl/envs/pendulum.hpp"

#include <cmath>

#include "psrl/common/rng.hpp"

namespace psrl::envs {

PendulumSwingUp::PendulumSwingUp(double sigma_f, double sigma_r, int horizon) {
  spec_.d_s = 3;
  spec_.d_a = 1;
  spec_.H = horizon;
  spec_.sigma_f = sigma_f;
  spec_.sigma_r = sigma_r;
  // |reward| <= pi^2 + 0.1 * (8 + slack)^2 + 0.001 * 4; 18 covers noisy speeds.
  spec_.r_max = 18.0;
  spec_.action_low = Eigen::VectorXd::Constant(1, -kMaxTorque);
  spec_.action_high = Eigen::VectorXd::Constant(1, kMaxTorque);
  spec_.name = "pendulum";
  spec_.validate();
}

double PendulumSwingUp::wrap_angle(double theta) {
  theta = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (theta < 0.0) theta += 2.0 * M_PI;
  return theta - M_PI;
}

Eigen::VectorXd PendulumSwingUp::sample_initial(std::mt19937_64& rng) const {
  const double theta = M_PI + rng::uniform(rng, -0.1, 0.1);
  const double theta_dot = rng::uniform(rng, -0.1, 0.1);
  Eigen::VectorXd s(3);
  s << std::cos(theta), std::sin(theta), theta_dot;
  return s;
}

Eigen::VectorXd PendulumSwingUp::mean_dynamics(const Eigen::VectorXd& s,
                                               const Eigen::VectorXd& a) const {
  const double theta = std::atan2(s(1), s(0));
  const double theta_dot = s(2);
  const double u = a(0);
  double new_dot = theta_dot + kDt * (3.0 * kGravity / (2.0 * kLength) * std::sin(theta) +
                                      3.0 / (kMass * kLength * kLength) * u);
  new_dot = std::min(std::max(new_dot, -kMaxSpeed), kMaxSpeed);
  const double new_theta = theta + kDt * new_dot;
  Eigen::VectorXd next(3);
  next << std::cos(new_theta), std::sin(new_theta), new_dot;
  return next;
}

double PendulumSwingUp::mean_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
  const double theta = wrap_angle(std::atan2(s(1), s(0)));
  return -(theta * theta + 0.1 * s(2) * s(2) + 0.001 * a(0) * a(0));
}

}  // namespace psrl::envs
