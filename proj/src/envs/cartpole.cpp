#include "psrl/envs/cartpole.hpp"

#include <cmath>

#include "psrl/common/rng.hpp"

namespace psrl::envs {

StochasticCartpole::StochasticCartpole(double sigma_f, double sigma_r, int horizon) {
  spec_.d_s = 4;
  spec_.d_a = 1;
  spec_.H = horizon;
  spec_.sigma_f = sigma_f;
  spec_.sigma_r = sigma_r;
  spec_.r_max = 1.0;
  spec_.action_low = Eigen::VectorXd::Constant(1, -kForceMax);
  spec_.action_high = Eigen::VectorXd::Constant(1, kForceMax);
  spec_.name = "cartpole";
  spec_.validate();
}

Eigen::VectorXd StochasticCartpole::sample_initial(std::mt19937_64& rng) const {
  Eigen::VectorXd s(4);
  for (int i = 0; i < 4; ++i) s(i) = rng::uniform(rng, -0.05, 0.05);
  return s;
}

Eigen::Vector2d StochasticCartpole::angle_step(const Eigen::Vector2d& as, double force) {
  const double theta = as(0), theta_dot = as(1);
  const double total_mass = kMassCart + kMassPole;
  const double polemass_length = kMassPole * kPoleHalfLength;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / total_mass));
  return {theta + kDt * theta_dot, theta_dot + kDt * theta_acc};
}

Eigen::VectorXd StochasticCartpole::mean_dynamics(const Eigen::VectorXd& s,
                                                  const Eigen::VectorXd& a) const {
  const double x = s(0), x_dot = s(1), theta = s(2), theta_dot = s(3);
  const double force = a(0);
  const double total_mass = kMassCart + kMassPole;
  const double polemass_length = kMassPole * kPoleHalfLength;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;
  Eigen::VectorXd next(4);
  next(0) = x + kDt * x_dot;
  next(1) = x_dot + kDt * x_acc;
  next(2) = theta + kDt * theta_dot;
  next(3) = theta_dot + kDt * theta_acc;
  return next;
}

double StochasticCartpole::mean_reward(const Eigen::VectorXd& s, const Eigen::VectorXd&) const {
  return 0.5 * (1.0 + std::cos(s(2)));
}

}  // namespace psrl::envs
