#include "psrl/envs/env.hpp"

#include "psrl/common/rng.hpp"
#include "psrl/envs/cartpole.hpp"
#include "psrl/envs/linear_mdp.hpp"
#include "psrl/envs/pendulum.hpp"

namespace psrl::envs {

void MdpSpec::validate() const {
  if (d_s < 1 || d_a < 1) throw std::invalid_argument("env: d_s and d_a must be >= 1");
  if (H < 1) throw std::invalid_argument("env: H must be >= 1");
  if (sigma_f < 0.0 || sigma_r < 0.0) throw std::invalid_argument("env: noise std must be >= 0");
  if (!(r_max > 0.0)) throw std::invalid_argument("env: r_max must be > 0");
  if (action_low.size() != d_a || action_high.size() != d_a)
    throw std::invalid_argument("env: action box dimension mismatch");
  for (int i = 0; i < d_a; ++i)
    if (!(action_low(i) < action_high(i)))
      throw std::invalid_argument("env: action_low must be < action_high componentwise");
}

Eigen::VectorXd Environment::clamp_action(const Eigen::VectorXd& a) const {
  if (a.size() != spec_.d_a) throw std::invalid_argument("env: action dimension mismatch");
  if (!a.allFinite()) throw EpisodeAbort("env '" + spec_.name + "': non-finite action");
  Eigen::VectorXd out = a;
  bool clamped = false;
  for (int i = 0; i < spec_.d_a; ++i) {
    if (out(i) < spec_.action_low(i)) {
      out(i) = spec_.action_low(i);
      clamped = true;
    } else if (out(i) > spec_.action_high(i)) {
      out(i) = spec_.action_high(i);
      clamped = true;
    }
  }
  if (clamped) ++clamp_count_;
  return out;
}

std::pair<Eigen::VectorXd, double> Environment::oracle_mean_dynamics(
    const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
  Eigen::VectorXd box = a;
  for (int i = 0; i < spec_.d_a; ++i)
    box(i) = std::min(std::max(box(i), spec_.action_low(i)), spec_.action_high(i));
  return {mean_dynamics(s, box), mean_reward(s, box)};
}

Transition Environment::step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                             std::mt19937_64& rng, int episode_index, int step_index) const {
  if (state.size() != spec_.d_s) throw std::invalid_argument("env: state dimension mismatch");
  if (!state.allFinite())
    throw EpisodeAbort("env '" + spec_.name + "': non-finite state at episode " +
                       std::to_string(episode_index) + " step " + std::to_string(step_index));
  Transition t;
  t.state = state;
  t.action = clamp_action(action);
  t.episode_index = episode_index;
  t.step_index = step_index;
  t.next_state = mean_dynamics(state, t.action);
  for (int i = 0; i < spec_.d_s; ++i) t.next_state(i) += spec_.sigma_f * rng::normal(rng);
  t.reward = mean_reward(state, t.action) + spec_.sigma_r * rng::normal(rng);
  if (!t.next_state.allFinite() || !std::isfinite(t.reward))
    throw EpisodeAbort("env '" + spec_.name + "': non-finite transition at episode " +
                       std::to_string(episode_index) + " step " + std::to_string(step_index));
  return t;
}

std::unique_ptr<Environment> make_env(const std::string& name, const EnvParams& p) {
  if (name == "cartpole")
    return std::make_unique<StochasticCartpole>(p.sigma_f, p.sigma_r,
                                                p.horizon > 0 ? p.horizon : 200);
  if (name == "pendulum")
    return std::make_unique<PendulumSwingUp>(p.sigma_f, p.sigma_r,
                                             p.horizon > 0 ? p.horizon : 200);
  if (name == "synthetic")
    return std::make_unique<SyntheticLinearMdp>(SyntheticLinearMdp::sample(
        p.d_s, p.d_a, p.horizon > 0 ? p.horizon : 50, p.sigma_f, p.sigma_r, p.r_max, p.seed));
  throw std::invalid_argument("env: unknown environment '" + name + "'");
}

}  // namespace psrl::envs
