#include "psrl/envs/linear_mdp.hpp"

#include <cmath>

#include "psrl/common/rng.hpp"

namespace psrl::envs {

SyntheticLinearMdp::SyntheticLinearMdp(Eigen::MatrixXd W_f, Eigen::VectorXd w_r, int H,
                                       double sigma_f, double sigma_r, double r_max,
                                       Eigen::VectorXd action_low, Eigen::VectorXd action_high)
    : W_f_(std::move(W_f)), w_r_(std::move(w_r)) {
  spec_.d_s = static_cast<int>(W_f_.rows());
  spec_.d_a = static_cast<int>(W_f_.cols() - W_f_.rows());
  if (spec_.d_a < 1 || w_r_.size() != W_f_.cols())
    throw std::invalid_argument("linear_mdp: inconsistent W_f / w_r shapes");
  spec_.H = H;
  spec_.sigma_f = sigma_f;
  spec_.sigma_r = sigma_r;
  spec_.r_max = r_max;
  spec_.action_low =
      action_low.size() ? std::move(action_low) : Eigen::VectorXd::Constant(spec_.d_a, -1.0);
  spec_.action_high =
      action_high.size() ? std::move(action_high) : Eigen::VectorXd::Constant(spec_.d_a, 1.0);
  spec_.name = "synthetic";
  spec_.validate();
  const Eigen::MatrixXd W_ss = W_f_.leftCols(spec_.d_s);
  if (W_ss.eigenvalues().cwiseAbs().maxCoeff() > 0.95 + 1e-12)
    throw std::invalid_argument("linear_mdp: state-block spectral radius exceeds 0.95");
}

SyntheticLinearMdp SyntheticLinearMdp::sample(int d_s, int d_a, int H, double sigma_f,
                                              double sigma_r, double r_max,
                                              std::uint64_t seed) {
  auto eng = rng::engine(rng::derive(seed, 0x11d));
  auto truncated_normal = [&](double std_dev, double bound) {
    for (;;) {
      const double x = rng::normal(eng, 0.0, std_dev);
      if (std::abs(x) <= bound) return x;
    }
  };
  Eigen::MatrixXd W_f(d_s, d_s + d_a);
  for (int i = 0; i < d_s; ++i)
    for (int j = 0; j < d_s; ++j) W_f(i, j) = truncated_normal(0.3, 0.7);
  for (int i = 0; i < d_s; ++i)
    for (int j = 0; j < d_a; ++j) W_f(i, d_s + j) = truncated_normal(0.5, 1.0);
  const double radius = W_f.leftCols(d_s).eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 0.95) W_f.leftCols(d_s) *= 0.95 / radius;
  Eigen::VectorXd w_r(d_s + d_a);
  for (int i = 0; i < d_s + d_a; ++i) w_r(i) = rng::normal(eng, 0.0, 0.5);
  return SyntheticLinearMdp(std::move(W_f), std::move(w_r), H, sigma_f, sigma_r, r_max);
}

Eigen::VectorXd SyntheticLinearMdp::sample_initial(std::mt19937_64&) const {
  return Eigen::VectorXd::Zero(spec_.d_s);
}

Eigen::VectorXd SyntheticLinearMdp::mean_dynamics(const Eigen::VectorXd& s,
                                                  const Eigen::VectorXd& a) const {
  Eigen::VectorXd sa(spec_.d_s + spec_.d_a);
  sa << s, a;
  return W_f_ * sa;
}

double SyntheticLinearMdp::mean_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
  Eigen::VectorXd sa(spec_.d_s + spec_.d_a);
  sa << s, a;
  const double r = w_r_.dot(sa);
  return std::min(std::max(r, -spec_.r_max), spec_.r_max);
}

}  // namespace psrl::envs
