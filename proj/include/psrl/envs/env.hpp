#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

namespace psrl::envs {

struct MdpSpec {
  int d_s = 0;
  int d_a = 0;
  int H = 1;
  double sigma_f = 0.0;
  double sigma_r = 0.0;
  double r_max = 1.0;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  std::string name;

  void validate() const;
};

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;  // as executed (post-clamp)
  double reward = 0.0;
  Eigen::VectorXd next_state;
  int episode_index = 0;
  int step_index = 1;
};

// Thrown when an episode must be aborted (non-finite state or action).
class EpisodeAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Environment {
 public:
  virtual ~Environment() = default;

  const MdpSpec& spec() const { return spec_; }

  // Initial-state distribution rho.
  virtual Eigen::VectorXd sample_initial(std::mt19937_64& rng) const = 0;
  // Noiseless one-step mean dynamics f*(s, a) for an in-box action.
  virtual Eigen::VectorXd mean_dynamics(const Eigen::VectorXd& s,
                                        const Eigen::VectorXd& a) const = 0;
  // Noiseless mean reward r*(s, a) for an in-box action.
  virtual double mean_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const = 0;

  Eigen::VectorXd reset(std::mt19937_64& rng) const { return sample_initial(rng); }

  // Clamps the action to the box; out-of-box components increment clamp_count.
  Eigen::VectorXd clamp_action(const Eigen::VectorXd& a) const;
  std::int64_t clamp_count() const { return clamp_count_; }
  void reset_clamp_count() const { clamp_count_ = 0; }

  // Noiseless (f*, r*) after clamping; does not count clamps.
  std::pair<Eigen::VectorXd, double> oracle_mean_dynamics(const Eigen::VectorXd& s,
                                                          const Eigen::VectorXd& a) const;

  // One stochastic step: clamp action, add N(0, sigma_f^2 I) to the next state
  // and N(0, sigma_r^2) to the reward. Draw order: state coords 0..d_s-1, then
  // reward. Throws EpisodeAbort if any state entry goes non-finite.
  Transition step(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                  std::mt19937_64& rng, int episode_index = 0, int step_index = 1) const;

 protected:
  MdpSpec spec_;
  mutable std::int64_t clamp_count_ = 0;
};

struct EnvParams {
  double sigma_f = 0.1;
  double sigma_r = 0.1;
  int horizon = 0;  // 0 = environment default
  // Synthetic linear MDP only:
  int d_s = 4;
  int d_a = 1;
  double r_max = 5.0;
  std::uint64_t seed = 1;  // seed for drawing the true (W_f, w_r)
};

// name: "cartpole" | "pendulum" | "synthetic"
std::unique_ptr<Environment> make_env(const std::string& name, const EnvParams& p = {});

}  // namespace psrl::envs
