#include "psrl/cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psrl/common/rng.hpp"
#include "psrl/common/serialize.hpp"

namespace psrl::cli {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw ConfigError(path + "." + item.key(), "unknown field");
  }
}

std::string field_path(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

void get_bool(const json& j, const std::string& path, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(field_path(path, key), "expected a boolean");
  out = v.get<bool>();
}

void get_int(const json& j, const std::string& path, const char* key, int& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(field_path(path, key), "expected an integer");
  out = v.get<int>();
}

void get_u64(const json& j, const std::string& path, const char* key, std::uint64_t& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.is_number_unsigned() == false && v.get<long long>() < 0))
    throw ConfigError(field_path(path, key), "expected a non-negative integer");
  out = v.get<std::uint64_t>();
}

void get_double(const json& j, const std::string& path, const char* key, double& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(field_path(path, key), "expected a number");
  out = v.get<double>();
}

void get_string(const json& j, const std::string& path, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(field_path(path, key), "expected a string");
  out = v.get<std::string>();
}

void get_int_list(const json& j, const std::string& path, const char* key, std::vector<int>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(field_path(path, key), "expected an array of integers");
  out.clear();
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(field_path(path, key), "expected an array of integers");
    out.push_back(e.get<int>());
  }
}

void parse_env(const json& j, const std::string& path, EnvConfig& out) {
  check_keys(j, path, {"name", "sigma_f", "sigma_r", "horizon", "d_s", "d_a", "r_max", "env_seed"});
  get_string(j, path, "name", out.name);
  get_double(j, path, "sigma_f", out.sigma_f);
  get_double(j, path, "sigma_r", out.sigma_r);
  get_int(j, path, "horizon", out.horizon);
  get_int(j, path, "d_s", out.d_s);
  get_int(j, path, "d_a", out.d_a);
  get_double(j, path, "r_max", out.r_max);
  get_u64(j, path, "env_seed", out.env_seed);
}

void parse_net(const json& j, const std::string& path, NetConfig& out) {
  check_keys(j, path, {"hidden", "penultimate_width", "activation", "learning_rate",
                       "weight_decay", "batch_size", "epochs", "max_grad_steps"});
  get_int_list(j, path, "hidden", out.hidden);
  get_int(j, path, "penultimate_width", out.penultimate_width);
  get_string(j, path, "activation", out.activation);
  get_double(j, path, "learning_rate", out.learning_rate);
  get_double(j, path, "weight_decay", out.weight_decay);
  get_int(j, path, "batch_size", out.batch_size);
  get_int(j, path, "epochs", out.epochs);
  get_int(j, path, "max_grad_steps", out.max_grad_steps);
}

void parse_cem(const json& j, const std::string& path, planner::CemConfig& out) {
  check_keys(j, path, {"popsize", "n_elites", "horizon", "max_iter", "n_particles",
                       "init_std", "alpha"});
  get_int(j, path, "popsize", out.popsize);
  get_int(j, path, "n_elites", out.n_elites);
  get_int(j, path, "horizon", out.horizon);
  get_int(j, path, "max_iter", out.max_iter);
  get_int(j, path, "n_particles", out.n_particles);
  get_double(j, path, "init_std", out.init_std);
  get_double(j, path, "alpha", out.alpha);
}

void parse_train(const json& j, const std::string& path, TrainSection& out) {
  check_keys(j, path, {"env", "episodes", "retrain_every", "train_features",
                       "checkpoint_every", "prior_scale", "net", "cem"});
  if (j.contains("env")) parse_env(j.at("env"), path + ".env", out.env);
  get_int(j, path, "episodes", out.episodes);
  get_int(j, path, "retrain_every", out.retrain_every);
  get_bool(j, path, "train_features", out.train_features);
  get_int(j, path, "checkpoint_every", out.checkpoint_every);
  get_double(j, path, "prior_scale", out.prior_scale);
  if (j.contains("net")) parse_net(j.at("net"), path + ".net", out.net);
  if (j.contains("cem")) parse_cem(j.at("cem"), path + ".cem", out.cem);
}

void parse_regret(const json& j, const std::string& path, RegretSection& out) {
  check_keys(j, path, {"d_s", "d_a", "H", "episodes", "n_mdps", "eval_rollouts",
                       "baseline_rollouts", "sigma_f", "sigma_r", "r_max", "grid_low",
                       "grid_high", "grid_points", "n_actions", "gh_points",
                       "known_mdp_control"});
  get_int(j, path, "d_s", out.d_s);
  get_int(j, path, "d_a", out.d_a);
  get_int(j, path, "H", out.H);
  get_int(j, path, "episodes", out.episodes);
  get_int(j, path, "n_mdps", out.n_mdps);
  get_int(j, path, "eval_rollouts", out.eval_rollouts);
  get_int(j, path, "baseline_rollouts", out.baseline_rollouts);
  get_double(j, path, "sigma_f", out.sigma_f);
  get_double(j, path, "sigma_r", out.sigma_r);
  get_double(j, path, "r_max", out.r_max);
  get_double(j, path, "grid_low", out.grid_low);
  get_double(j, path, "grid_high", out.grid_high);
  get_int(j, path, "grid_points", out.grid_points);
  get_int(j, path, "n_actions", out.n_actions);
  get_int(j, path, "gh_points", out.gh_points);
  get_bool(j, path, "known_mdp_control", out.known_mdp_control);
}

void parse_theory(const json& j, const std::string& path, TheorySection& out) {
  check_keys(j, path, {"suite", "cases", "dims"});
  get_string(j, path, "suite", out.suite);
  get_int(j, path, "cases", out.cases);
  get_int_list(j, path, "dims", out.dims);
}

json env_json(const EnvConfig& e) {
  return json{{"name", e.name},       {"sigma_f", e.sigma_f}, {"sigma_r", e.sigma_r},
              {"horizon", e.horizon}, {"d_s", e.d_s},         {"d_a", e.d_a},
              {"r_max", e.r_max},     {"env_seed", e.env_seed}};
}

json net_json(const NetConfig& n) {
  return json{{"hidden", n.hidden},
              {"penultimate_width", n.penultimate_width},
              {"activation", n.activation},
              {"learning_rate", n.learning_rate},
              {"weight_decay", n.weight_decay},
              {"batch_size", n.batch_size},
              {"epochs", n.epochs},
              {"max_grad_steps", n.max_grad_steps}};
}

json cem_json(const planner::CemConfig& c) {
  return json{{"popsize", c.popsize},         {"n_elites", c.n_elites},
              {"horizon", c.horizon},         {"max_iter", c.max_iter},
              {"n_particles", c.n_particles}, {"init_std", c.init_std},
              {"alpha", c.alpha}};
}

json train_json(const TrainSection& t) {
  return json{{"env", env_json(t.env)},
              {"episodes", t.episodes},
              {"retrain_every", t.retrain_every},
              {"train_features", t.train_features},
              {"checkpoint_every", t.checkpoint_every},
              {"prior_scale", t.prior_scale},
              {"net", net_json(t.net)},
              {"cem", cem_json(t.cem)}};
}

json regret_json(const RegretSection& r) {
  return json{{"d_s", r.d_s},
              {"d_a", r.d_a},
              {"H", r.H},
              {"episodes", r.episodes},
              {"n_mdps", r.n_mdps},
              {"eval_rollouts", r.eval_rollouts},
              {"baseline_rollouts", r.baseline_rollouts},
              {"sigma_f", r.sigma_f},
              {"sigma_r", r.sigma_r},
              {"r_max", r.r_max},
              {"grid_low", r.grid_low},
              {"grid_high", r.grid_high},
              {"grid_points", r.grid_points},
              {"n_actions", r.n_actions},
              {"gh_points", r.gh_points},
              {"known_mdp_control", r.known_mdp_control}};
}

json theory_json(const TheorySection& t) {
  return json{{"suite", t.suite}, {"cases", t.cases}, {"dims", t.dims}};
}

}  // namespace

envs::EnvParams EnvConfig::params() const {
  envs::EnvParams p;
  p.sigma_f = sigma_f;
  p.sigma_r = sigma_r;
  p.horizon = horizon;
  p.d_s = d_s;
  p.d_a = d_a;
  p.r_max = r_max;
  p.seed = env_seed;
  return p;
}

regretlab::RegretConfig RegretSection::params(std::uint64_t seed, int workers) const {
  regretlab::RegretConfig rc;
  rc.d_s = d_s;
  rc.d_a = d_a;
  rc.H = H;
  rc.episodes = episodes;
  rc.n_mdps = n_mdps;
  rc.eval_rollouts = eval_rollouts;
  rc.baseline_rollouts = baseline_rollouts;
  rc.sigma_f = sigma_f;
  rc.sigma_r = sigma_r;
  rc.r_max = r_max;
  rc.grid_low = grid_low;
  rc.grid_high = grid_high;
  rc.grid_points = grid_points;
  rc.n_actions = n_actions;
  rc.gh_points = gh_points;
  rc.known_mdp_control = known_mdp_control;
  rc.seed = seed;
  rc.workers = workers;
  return rc;
}

ExperimentConfig ExperimentConfig::defaults_for(const std::string& kind,
                                                const std::string& env_name) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.train.env.name = env_name;
  if (env_name == "pendulum") {
    cfg.train.env.d_s = 3;
    cfg.train.cem.popsize = 100;
    cfg.train.cem.n_elites = 5;
    cfg.train.cem.horizon = 20;
  } else if (env_name == "cartpole") {
    cfg.train.env.d_s = 4;
    cfg.train.cem.popsize = 500;
    cfg.train.cem.n_elites = 50;
    cfg.train.cem.horizon = 30;
  } else if (env_name == "synthetic") {
    cfg.train.env.d_s = 4;
    cfg.train.env.horizon = 50;
    cfg.train.cem.popsize = 100;
    cfg.train.cem.n_elites = 10;
    cfg.train.cem.horizon = 10;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "", {"kind", "seed", "n_trials", "out_dir", "workers", "train", "regret", "theory"});
  std::string kind = "train";
  get_string(j, "", "kind", kind);
  std::string env_name = "cartpole";
  if (j.contains("train") && j.at("train").is_object() && j.at("train").contains("env") &&
      j.at("train").at("env").is_object() && j.at("train").at("env").contains("name") &&
      j.at("train").at("env").at("name").is_string()) {
    env_name = j.at("train").at("env").at("name").get<std::string>();
  }
  ExperimentConfig cfg = defaults_for(kind, env_name);
  if (!j.contains("seed")) throw ConfigError("seed", "required field is missing");
  get_u64(j, "", "seed", cfg.seed);
  get_int(j, "", "n_trials", cfg.n_trials);
  get_string(j, "", "out_dir", cfg.out_dir);
  get_int(j, "", "workers", cfg.workers);
  if (j.contains("train")) parse_train(j.at("train"), "train", cfg.train);
  if (j.contains("regret")) parse_regret(j.at("regret"), "regret", cfg.regret);
  if (j.contains("theory")) parse_theory(j.at("theory"), "theory", cfg.theory);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j{{"kind", kind},       {"seed", seed},
         {"n_trials", n_trials}, {"out_dir", out_dir},
         {"workers", workers},   {"train", train_json(train)},
         {"regret", regret_json(regret)}, {"theory", theory_json(theory)}};
  return j.dump(2);
}

std::uint64_t ExperimentConfig::config_hash() const {
  // Canonical dump with the output-routing fields zeroed out: where results are
  // written and how many workers run must not change experiment identity.
  ExperimentConfig c = *this;
  c.out_dir.clear();
  c.workers = 0;
  return ser::fnv1a(c.to_json_text());
}

std::uint64_t ExperimentConfig::trial_seed(int trial) const {
  return rng::derive(seed, 100, static_cast<std::uint64_t>(trial));
}

agent::AgentConfig ExperimentConfig::agent_config(std::uint64_t trial_seed,
                                                  const envs::MdpSpec& spec) const {
  agent::AgentConfig ac;
  ac.f_spec.hidden = train.net.hidden;
  ac.f_spec.penultimate_width = train.net.penultimate_width;
  ac.f_spec.activation = featnet::activation_from_name(train.net.activation);
  ac.f_spec.learning_rate = train.net.learning_rate;
  ac.f_spec.weight_decay = train.net.weight_decay;
  ac.f_spec.batch_size = train.net.batch_size;
  ac.f_spec.epochs = train.net.epochs;
  ac.f_spec.max_grad_steps = train.net.max_grad_steps;
  ac.r_spec = ac.f_spec;
  ac.cem = train.cem;
  ac.episodes = train.episodes;
  ac.retrain_every = train.retrain_every;
  ac.train_features = train.train_features;
  ac.seed = trial_seed;
  ac.resolve(spec);
  ac.f_prior.covariance *= train.prior_scale * train.prior_scale;
  ac.r_prior.covariance *= train.prior_scale * train.prior_scale;
  return ac;
}

void ExperimentConfig::validate() const {
  if (kind != "train" && kind != "regret" && kind != "theory")
    throw ConfigError("kind", "must be one of train, regret, theory (got '" + kind + "')");
  if (n_trials < 1) throw ConfigError("n_trials", "must be >= 1");
  if (workers < 0) throw ConfigError("workers", "must be >= 0 (0 = all cores)");
  if (out_dir.empty()) throw ConfigError("out_dir", "must be non-empty");
  if (kind == "train") {
    const TrainSection& t = train;
    if (t.env.name != "cartpole" && t.env.name != "pendulum" && t.env.name != "synthetic")
      throw ConfigError("train.env.name", "unknown environment '" + t.env.name + "'");
    if (t.env.sigma_f <= 0.0) throw ConfigError("train.env.sigma_f", "must be > 0");
    if (t.env.sigma_r <= 0.0) throw ConfigError("train.env.sigma_r", "must be > 0");
    if (t.env.horizon < 0) throw ConfigError("train.env.horizon", "must be >= 0");
    if (t.env.d_s < 1) throw ConfigError("train.env.d_s", "must be >= 1");
    if (t.env.d_a < 1) throw ConfigError("train.env.d_a", "must be >= 1");
    if (t.env.r_max <= 0.0) throw ConfigError("train.env.r_max", "must be > 0");
    if (t.episodes < 1) throw ConfigError("train.episodes", "must be >= 1");
    if (t.retrain_every < 1) throw ConfigError("train.retrain_every", "must be >= 1");
    if (t.checkpoint_every < 1) throw ConfigError("train.checkpoint_every", "must be >= 1");
    if (t.prior_scale <= 0.0) throw ConfigError("train.prior_scale", "must be > 0");
    for (int h : t.net.hidden)
      if (h < 1) throw ConfigError("train.net.hidden", "layer widths must be >= 1");
    if (t.net.penultimate_width < 1) throw ConfigError("train.net.penultimate_width", "must be >= 1");
    try {
      featnet::activation_from_name(t.net.activation);
    } catch (const std::exception& e) {
      throw ConfigError("train.net.activation", e.what());
    }
    if (t.net.learning_rate <= 0.0) throw ConfigError("train.net.learning_rate", "must be > 0");
    if (t.net.weight_decay < 0.0) throw ConfigError("train.net.weight_decay", "must be >= 0");
    if (t.net.batch_size < 1) throw ConfigError("train.net.batch_size", "must be >= 1");
    if (t.net.epochs < 0) throw ConfigError("train.net.epochs", "must be >= 0");
    if (t.net.max_grad_steps < 0) throw ConfigError("train.net.max_grad_steps", "must be >= 0");
    try {
      t.cem.validate();
    } catch (const std::exception& e) {
      throw ConfigError("train.cem", e.what());
    }
  } else if (kind == "regret") {
    try {
      regret.params(seed, workers).validate();
    } catch (const std::exception& e) {
      throw ConfigError("regret", e.what());
    }
  } else {
    const TheorySection& t = theory;
    if (t.suite != "lemma1" && t.suite != "tv" && t.suite != "variance" &&
        t.suite != "concentration" && t.suite != "all")
      throw ConfigError("theory.suite",
                        "must be one of lemma1, tv, variance, concentration, all (got '" +
                            t.suite + "')");
    if (t.cases < 1) throw ConfigError("theory.cases", "must be >= 1");
    if (t.dims.empty()) throw ConfigError("theory.dims", "must be non-empty");
    for (int d : t.dims)
      if (d < 1) throw ConfigError("theory.dims", "dimensions must be >= 1");
  }
}

}  // namespace psrl::cli
