#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "psrl/featnet/mlp.hpp"

namespace psrl::planner {

// One posterior draw of the MDP: feature nets for both heads plus sampled
// linear head weights. Dynamics head predicts the state delta by default
// (next = s + target_mean_f + W_f^T phi_f(s,a)); with delta_dynamics = false
// it predicts the next state directly. Reward head: r = target_mean_r +
// w_r . phi_r(s,a).
struct SampledModel {
  featnet::Mlp f_net;
  featnet::Mlp r_net;
  Eigen::MatrixXd W_f;  // d_phi_f x d_s
  Eigen::VectorXd w_r;  // d_phi_r
  double sigma_f = 0.0;
  double sigma_r = 0.0;
  double r_max = 1.0;
  bool delta_dynamics = true;

  void validate() const {
    if (W_f.rows() != f_net.feature_dim())
      throw std::invalid_argument("sampled_model: W_f rows != dynamics feature dim");
    if (W_f.cols() != state_dim())
      throw std::invalid_argument("sampled_model: W_f cols != state dim");
    if (w_r.size() != r_net.feature_dim())
      throw std::invalid_argument("sampled_model: w_r size != reward feature dim");
    if (r_net.spec().input_dim != f_net.spec().input_dim)
      throw std::invalid_argument("sampled_model: head input dims differ");
    if (!W_f.allFinite() || !w_r.allFinite())
      throw std::invalid_argument("sampled_model: non-finite weights");
    if (sigma_f < 0.0 || sigma_r < 0.0 || !(r_max > 0.0))
      throw std::invalid_argument("sampled_model: invalid noise/reward bounds");
  }

  int state_dim() const { return f_net.spec().output_dim; }
  int action_dim() const { return f_net.spec().input_dim - state_dim(); }
  double transition_noise_std() const { return sigma_f; }
  double reward_bound() const { return r_max; }

  Eigen::MatrixXd predict_mean_batch(const Eigen::MatrixXd& states,
                                     const Eigen::MatrixXd& actions) const {
    Eigen::MatrixXd X(states.rows(), states.cols() + actions.cols());
    X << states, actions;
    Eigen::MatrixXd out = f_net.embed_all(X) * W_f;
    out.rowwise() += f_net.target_mean().transpose();
    if (delta_dynamics) out += states;
    return out;
  }

  Eigen::VectorXd reward_batch(const Eigen::MatrixXd& states,
                               const Eigen::MatrixXd& actions) const {
    Eigen::MatrixXd X(states.rows(), states.cols() + actions.cols());
    X << states, actions;
    return (r_net.embed_all(X) * w_r).array() + r_net.target_mean()(0);
  }
};

}  // namespace psrl::planner
