#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "psrl/agent/dataset.hpp"
#include "psrl/bayes/blr.hpp"
#include "psrl/envs/env.hpp"
#include "psrl/featnet/mlp.hpp"
#include "psrl/planner/cem.hpp"
#include "psrl/planner/sampled_model.hpp"

namespace psrl::agent {

struct AgentConfig {
  featnet::MlpSpec f_spec;
  featnet::MlpSpec r_spec;
  bayes::GaussianLinearPrior f_prior;
  bayes::GaussianLinearPrior r_prior;
  planner::CemConfig cem;
  int episodes = 30;
  int retrain_every = 1;
  std::uint64_t seed = 1;
  // false: frozen identity feature maps, posteriors advance by sequential
  // updates only (the exact linear-regression case).
  bool train_features = true;

  void validate() const;
  // Fills dimension-dependent fields (net dims, priors) from the environment
  // if they were left unset.
  void resolve(const envs::MdpSpec& spec);
};

struct EpisodeRecord {
  int episode_index = 0;
  double total_reward = 0.0;
  int steps = 0;
  double wall_ms = 0.0;
  double mean_pred_variance = 0.0;
  double max_pred_variance = 0.0;
  int kmax = 0;  // 1-based step index of the max-variance visited point
  int n_posterior_samples = 0;  // per head; 1 after the random episode
  bool truncated = false;
};

// One PSRL episode: draw a single weight sample per head, plan with the same
// SampledModel for all H steps, log every transition. sample_rng drives the
// posterior draws, env_rng the environment, planner_key the CEM streams.
// delta_dynamics selects whether the sampled model predicts s' - s or s'.
EpisodeRecord run_episode(const envs::Environment& env,
                          const bayes::GaussianLinearPosterior& posterior_f,
                          const bayes::GaussianLinearPosterior& posterior_r,
                          const featnet::Mlp& f_net, const featnet::Mlp& r_net,
                          planner::CemPlanner& planner, int episode_index,
                          std::mt19937_64& sample_rng, std::mt19937_64& env_rng,
                          std::uint64_t planner_key, std::vector<envs::Transition>* out,
                          bool delta_dynamics = true);

class Trainer {
 public:
  Trainer(const envs::Environment& env, AgentConfig cfg);

  // Runs the next episode (index 0 executes uniformly random actions), then
  // retrains/updates the posteriors. Appends to records().
  EpisodeRecord run_one_episode();

  int episodes_done() const { return episode_; }
  const AgentConfig& config() const { return cfg_; }
  const std::vector<EpisodeRecord>& records() const { return records_; }
  const Dataset& dataset() const { return data_; }
  const featnet::Mlp& f_net() const { return f_net_; }
  const featnet::Mlp& r_net() const { return r_net_; }
  const bayes::GaussianLinearPosterior& posterior_f() const { return *posterior_f_; }
  const bayes::GaussianLinearPosterior& posterior_r() const { return *posterior_r_; }
  int retrain_failures() const { return retrain_failures_; }

  void save(ser::Writer& w) const;
  // Restores everything but the environment and config, which the caller
  // supplies (the cli keeps them alongside the payload).
  static Trainer load(ser::Reader& r, const envs::Environment& env, AgentConfig cfg);

 private:
  void rebuild_or_update_posteriors(long first_new_row);
  void retrain_nets();

  const envs::Environment& env_;
  AgentConfig cfg_;
  Dataset data_;
  featnet::Mlp f_net_, r_net_;
  std::unique_ptr<bayes::GaussianLinearPosterior> posterior_f_, posterior_r_;
  planner::CemPlanner planner_;
  std::mt19937_64 env_rng_, sample_rng_, train_rng_;
  int episode_ = 0;
  int retrain_failures_ = 0;
  std::vector<EpisodeRecord> records_;
};

// Convenience wrapper: fresh Trainer, cfg.episodes episodes, returns the curve.
std::vector<EpisodeRecord> run_training(const envs::Environment& env, AgentConfig cfg);

}  // namespace psrl::agent
