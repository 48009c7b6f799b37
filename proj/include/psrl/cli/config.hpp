#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "psrl/agent/trainer.hpp"
#include "psrl/envs/env.hpp"
#include "psrl/regretlab/bayes_regret.hpp"

namespace psrl::cli {

// Schema violation with the offending field path (e.g. "train.cem.popsize").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct EnvConfig {
  std::string name = "cartpole";  // cartpole | pendulum | synthetic
  double sigma_f = 0.1;
  double sigma_r = 0.1;
  int horizon = 0;  // 0 = environment default (200)
  int d_s = 4;      // synthetic only
  int d_a = 1;      // synthetic only
  double r_max = 5.0;        // synthetic only
  std::uint64_t env_seed = 1;  // synthetic only: seed of the true model draw

  envs::EnvParams params() const;
};

struct NetConfig {
  std::vector<int> hidden = {200};
  int penultimate_width = 8;
  std::string activation = "swish";
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  int batch_size = 32;
  int epochs = 5;
  int max_grad_steps = 2000;
};

struct TrainSection {
  EnvConfig env;
  int episodes = 30;
  int retrain_every = 1;
  bool train_features = true;
  int checkpoint_every = 10;
  double prior_scale = 1.0;
  NetConfig net;
  planner::CemConfig cem;  // defaults filled per env by defaults_for
};

struct RegretSection {
  int d_s = 1, d_a = 1, H = 10;
  int episodes = 2000;
  int n_mdps = 20;
  int eval_rollouts = 5000;
  int baseline_rollouts = 20000;
  double sigma_f = 0.1, sigma_r = 0.1, r_max = 5.0;
  double grid_low = -5.5, grid_high = 5.5;
  int grid_points = 221;
  int n_actions = 21;
  int gh_points = 16;
  bool known_mdp_control = false;

  regretlab::RegretConfig params(std::uint64_t seed, int workers) const;
};

struct TheorySection {
  std::string suite = "all";  // lemma1 | tv | variance | concentration | all
  int cases = 1000;
  std::vector<int> dims = {2, 4, 8};
};

struct ExperimentConfig {
  std::string kind = "train";  // train | regret | theory
  std::uint64_t seed = 1;
  int n_trials = 1;
  std::string out_dir = "runs/out";
  int workers = 1;
  TrainSection train;
  RegretSection regret;
  TheorySection theory;

  static ExperimentConfig defaults_for(const std::string& kind, const std::string& env_name);
  static ExperimentConfig from_json_text(const std::string& text);  // throws ConfigError
  static ExperimentConfig from_file(const std::string& path);       // throws ConfigError
  std::string to_json_text() const;

  // FNV-1a over the canonical JSON of everything that affects numeric output
  // (out_dir and workers excluded).
  std::uint64_t config_hash() const;

  agent::AgentConfig agent_config(std::uint64_t trial_seed, const envs::MdpSpec& spec) const;
  std::uint64_t trial_seed(int trial) const;

  void validate() const;  // throws ConfigError with a field path
};

}  // namespace psrl::cli
