#pragma once

#include "psrl/envs/env.hpp"

namespace psrl::envs {

// s' = W_f [s; a] + eps_f, reward = clip(w_r . [s; a], +-r_max) + eps_r.
// Initial state is a point mass at the origin. The state block of W_f has
// spectral radius <= 0.95 so trajectories stay bounded.
class SyntheticLinearMdp : public Environment {
 public:
  SyntheticLinearMdp(Eigen::MatrixXd W_f, Eigen::VectorXd w_r, int H, double sigma_f,
                     double sigma_r, double r_max,
                     Eigen::VectorXd action_low = Eigen::VectorXd(),
                     Eigen::VectorXd action_high = Eigen::VectorXd());

  // Draws a random instance: W_ss entries N(0, 0.3^2) truncated to [-0.7, 0.7]
  // (rescaled if the spectral radius still exceeds 0.95), W_sa entries
  // N(0, 0.5^2) truncated to [-1, 1], w_r entries N(0, 0.5^2).
  static SyntheticLinearMdp sample(int d_s, int d_a, int H, double sigma_f, double sigma_r,
                                   double r_max, std::uint64_t seed);

  Eigen::VectorXd sample_initial(std::mt19937_64& rng) const override;
  Eigen::VectorXd mean_dynamics(const Eigen::VectorXd& s,
                                const Eigen::VectorXd& a) const override;
  double mean_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const override;

  const Eigen::MatrixXd& W_f() const { return W_f_; }
  const Eigen::VectorXd& w_r() const { return w_r_; }

 private:
  Eigen::MatrixXd W_f_;  // d_s x (d_s + d_a)
  Eigen::VectorXd w_r_;  // d_s + d_a
};

}  // namespace psrl::envs
