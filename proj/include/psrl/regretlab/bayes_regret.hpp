#pragma once

#include <cstdint>
#include <vector>

#include "psrl/regretlab/grid_dp.hpp"

namespace psrl::regretlab {

struct RegretConfig {
  int d_s = 1;
  int d_a = 1;
  int H = 10;
  int episodes = 2000;
  int n_mdps = 20;
  int eval_rollouts = 5000;      // Monte-Carlo evaluations of the realized policy
  int baseline_rollouts = 20000; // Monte-Carlo evaluation of the optimal policy
  double sigma_f = 0.1;
  double sigma_r = 0.1;
  double r_max = 5.0;
  double grid_low = -5.5, grid_high = 5.5;
  int grid_points = 221;
  int n_actions = 21;
  int gh_points = 16;
  std::uint64_t seed = 1;
  int workers = 1;
  // Collapse the agent's posterior onto the truth: per-episode regret must be
  // statistically indistinguishable from 0.
  bool known_mdp_control = false;

  void validate() const;
};

struct RegretRecord {
  int episode_index = 0;  // k, 1-based
  long T = 0;             // k * H
  double per_episode = 0.0;
  double cumulative = 0.0;
  double stderr_cum = 0.0;  // across MDP draws
};

struct RegretCurve {
  std::vector<RegretRecord> records;
  // Per-draw cumulative curves (n_mdps x episodes), row-major by draw.
  std::vector<std::vector<double>> per_draw_cumulative;
  double escape_rate = 0.0;
  bool valid = true;  // escape rate <= 1%
  int H = 0;
  int d = 0;  // d_s + d_a

  double cumulative_at_T(long T) const;  // linear in k; throws if out of range
};

// Bayesian-regret protocol: per draw, sample a true linear MDP from the prior,
// run exact PSRL (identity features, sequential conjugate updates), realize
// each episode's policy by grid DP on the sampled MDP, and score
// delta_k = MC(optimal policy) - MC(realized policy) on the true MDP.
RegretCurve bayes_regret_experiment(const RegretConfig& cfg);

}  // namespace psrl::regretlab
