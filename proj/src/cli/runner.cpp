#include "psrl/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psrl/cli/checkpoint.hpp"
#include "psrl/cli/report.hpp"
#include "psrl/common/csv.hpp"
#include "psrl/common/parallel.hpp"
#include "psrl/common/rng.hpp"
#include "psrl/common/version.hpp"
#include "psrl/regretlab/bayes_regret.hpp"
#include "psrl/regretlab/concentration.hpp"
#include "psrl/regretlab/tv.hpp"
#include "psrl/regretlab/variance_sum.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace psrl::cli {
namespace {

std::string timestamp_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

// Run manifest: written before any trial starts, finalized (status, finish
// time, full file inventory) when the run ends.
struct Manifest {
  const ExperimentConfig* cfg = nullptr;
  std::string run_dir;
  std::string started, finished;
  std::string status = "running";
  std::vector<std::string> inventory;

  void add(const std::string& name) {
    if (std::find(inventory.begin(), inventory.end(), name) == inventory.end())
      inventory.push_back(name);
  }

  void write() const {
    json trial_seeds = json::array();
    for (int t = 0; t < cfg->n_trials; ++t) trial_seeds.push_back(cfg->trial_seed(t));
    std::vector<std::string> inv = inventory;
    std::sort(inv.begin(), inv.end());
    json j{{"kind", cfg->kind},
           {"seed", cfg->seed},
           {"n_trials", cfg->n_trials},
           {"trial_seeds", trial_seeds},
           {"config_hash", hash_hex(cfg->config_hash())},
           {"code_version", std::string(psrl::kCodeVersion)},
           {"started", started},
           {"finished", finished},
           {"status", status},
           {"inventory", inv}};
    write_text_atomic(run_dir + "/manifest.json", j.dump(2) + "\n");
  }
};

std::string ckpt_path(const std::string& dir, int trial) {
  return dir + "/trial_" + std::to_string(trial) + ".ckpt";
}

std::string trial_csv_path(const std::string& dir, int trial) {
  return dir + "/episodes_trial_" + std::to_string(trial) + ".csv";
}

const std::vector<std::string> kEpisodeHeader = {"trial", "episode", "total_reward",
                                                 "mean_pred_variance", "wall_ms"};

// Writes one trial's full episode history to its per-trial CSV.
void write_trial_csv(const std::string& dir, int trial,
                     const std::vector<agent::EpisodeRecord>& records) {
  csv::Writer w(trial_csv_path(dir, trial), kEpisodeHeader);
  for (const auto& r : records)
    w.row_nums({static_cast<double>(trial), static_cast<double>(r.episode_index),
                r.total_reward, r.mean_pred_variance, r.wall_ms});
  w.close();
}

// Concatenates the per-trial CSVs in trial order into episodes.csv, then
// removes the per-trial files.
void merge_trial_csvs(const std::string& dir, int n_trials) {
  csv::Writer w(dir + "/episodes.csv", kEpisodeHeader);
  for (int t = 0; t < n_trials; ++t) {
    csv::Table part = csv::read(trial_csv_path(dir, t));
    for (const auto& row : part.rows) w.row(row);
  }
  w.close();
  for (int t = 0; t < n_trials; ++t) fs::remove(trial_csv_path(dir, t));
}

// Advances one trial to `target` episodes, checkpointing every
// checkpoint_every episodes and at the configured end.
void continue_trial(const ExperimentConfig& cfg, const std::string& dir, int trial,
                    agent::Trainer& trainer, int target) {
  while (trainer.episodes_done() < target) {
    trainer.run_one_episode();
    const int done = trainer.episodes_done();
    if (done % cfg.train.checkpoint_every == 0 || done == cfg.train.episodes)
      write_checkpoint(ckpt_path(dir, trial), cfg, trial, trainer);
  }
}

int run_train(const ExperimentConfig& cfg, const RunOptions& opts) {
  const std::string dir = cfg.out_dir;
  fs::create_directories(dir);
  write_text_atomic(dir + "/config.json", cfg.to_json_text() + "\n");

  Manifest man;
  man.cfg = &cfg;
  man.run_dir = dir;
  man.started = timestamp_utc();
  man.add("manifest.json");
  man.add("config.json");
  man.write();

  const int target = opts.stop_after > 0 ? std::min(opts.stop_after, cfg.train.episodes)
                                         : cfg.train.episodes;
  std::mutex io_mutex;
  std::vector<std::string> errors(cfg.n_trials);
  parallel_for(cfg.n_trials, cfg.workers, [&](int t) {
    try {
      auto env = envs::make_env(cfg.train.env.name, cfg.train.env.params());
      agent::Trainer trainer(*env, cfg.agent_config(cfg.trial_seed(t), env->spec()));
      continue_trial(cfg, dir, t, trainer, target);
      write_trial_csv(dir, t, trainer.records());
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << "trial " << t << ": " << trainer.episodes_done() << " episodes, last reward "
                << trainer.records().back().total_reward << "\n";
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });
  for (int t = 0; t < cfg.n_trials; ++t) {
    if (!errors[t].empty()) {
      man.status = "failed";
      man.finished = timestamp_utc();
      man.write();
      std::cerr << "error: trial " << t << " failed: " << errors[t] << "\n";
      return 1;
    }
  }

  merge_trial_csvs(dir, cfg.n_trials);
  man.add("episodes.csv");
  for (int t = 0; t < cfg.n_trials; ++t) man.add("trial_" + std::to_string(t) + ".ckpt");
  man.status = target < cfg.train.episodes ? "partial" : "complete";
  man.finished = timestamp_utc();
  man.write();
  std::cout << "wrote " << dir << "/episodes.csv (" << cfg.n_trials << " trials x " << target
            << " episodes)\n";
  return 0;
}

int run_regret(const ExperimentConfig& cfg) {
  const std::string dir = cfg.out_dir;
  fs::create_directories(dir);
  write_text_atomic(dir + "/config.json", cfg.to_json_text() + "\n");

  Manifest man;
  man.cfg = &cfg;
  man.run_dir = dir;
  man.started = timestamp_utc();
  man.add("manifest.json");
  man.add("config.json");
  man.write();

  regretlab::RegretConfig rc = cfg.regret.params(cfg.seed, cfg.workers);
  regretlab::RegretCurve curve = regretlab::bayes_regret_experiment(rc);

  {
    csv::Writer w(dir + "/regret.csv", {"H", "d", "T", "per_episode", "regret", "stderr"});
    for (const auto& r : curve.records)
      w.row_nums({static_cast<double>(curve.H), static_cast<double>(curve.d),
                  static_cast<double>(r.T), r.per_episode, r.cumulative, r.stderr_cum});
    w.close();
  }
  man.add("regret.csv");

  json ratios = json::array();
  const long t_max = static_cast<long>(rc.episodes) * rc.H;
  for (long frac : {16L, 8L, 4L}) {
    const long t0 = t_max / frac;
    if (t0 < rc.H || t0 % rc.H != 0 || (4 * t0) % rc.H != 0) continue;
    const double r1 = curve.cumulative_at_T(t0);
    const double r4 = curve.cumulative_at_T(4 * t0);
    json entry{{"T", t0}, {"regret_T", r1}, {"regret_4T", r4}};
    entry["ratio"] = r1 > 0.0 ? r4 / r1 : 0.0;
    ratios.push_back(entry);
  }
  json summary{{"H", curve.H},
               {"d", curve.d},
               {"episodes", rc.episodes},
               {"n_mdps", rc.n_mdps},
               {"known_mdp_control", rc.known_mdp_control},
               {"escape_rate", curve.escape_rate},
               {"valid", curve.valid},
               {"final_regret", curve.records.empty() ? 0.0 : curve.records.back().cumulative},
               {"ratios", ratios}};
  write_text_atomic(dir + "/summary.json", summary.dump(2) + "\n");
  man.add("summary.json");

  man.status = "complete";
  man.finished = timestamp_utc();
  man.write();
  std::cout << "regret run: " << rc.episodes << " episodes x " << rc.n_mdps
            << " draws, final cumulative regret "
            << (curve.records.empty() ? 0.0 : curve.records.back().cumulative)
            << ", escape rate " << curve.escape_rate << (curve.valid ? "" : " (INVALID)") << "\n";
  return 0;
}

// Theory suites: randomized checks of the distance bound, the exact TV
// formula, the posterior-variance sum bound, and posterior concentration.
int run_theory(const ExperimentConfig& cfg) {
  const std::string dir = cfg.out_dir;
  fs::create_directories(dir);
  write_text_atomic(dir + "/config.json", cfg.to_json_text() + "\n");

  Manifest man;
  man.cfg = &cfg;
  man.run_dir = dir;
  man.started = timestamp_utc();
  man.add("manifest.json");
  man.add("config.json");
  man.write();

  const std::string& suite = cfg.theory.suite;
  const int cases = cfg.theory.cases;
  int violations = 0;
  json details;

  if (suite == "lemma1" || suite == "all") {
    csv::Writer w(dir + "/lemma1.csv",
                  {"family", "case", "d", "delta", "scale", "numeric_l1", "bound", "holds",
                   "quad_error"});
    int bad = 0, flagged = 0;
    for (auto family : {regretlab::NoiseFamily::gaussian, regretlab::NoiseFamily::laplace,
                        regretlab::NoiseFamily::uniform}) {
      auto eng = rng::engine(rng::derive(cfg.seed, 0x71, static_cast<int>(family)));
      for (int i = 0; i < cases; ++i) {
        const int d = cfg.theory.dims[i % cfg.theory.dims.size()];
        regretlab::SymmetricNoiseSpec spec;
        spec.family = family;
        spec.dim = d;
        spec.scale = 0.05 + 2.95 * rng::uniform(eng, 0.0, 1.0);
        Eigen::VectorXd mu1(d), mu2(d);
        for (int k = 0; k < d; ++k) {
          mu1[k] = 6.0 * rng::uniform(eng, 0.0, 1.0) - 3.0;
          mu2[k] = 6.0 * rng::uniform(eng, 0.0, 1.0) - 3.0;
        }
        const auto res = regretlab::lemma1_bound_check(spec, mu1, mu2);
        bad += res.holds ? 0 : 1;
        flagged += res.quadrature_flagged ? 1 : 0;
        w.row({regretlab::family_name(family), csv::format_num(i), csv::format_num(d),
               csv::format_num((mu1 - mu2).norm()), csv::format_num(spec.scale),
               csv::format_num(res.numeric_l1), csv::format_num(res.bound),
               res.holds ? "1" : "0", csv::format_num(res.quadrature_error)});
      }
    }
    w.close();
    man.add("lemma1.csv");
    violations += bad;
    details["lemma1"] = json{{"cases", 3 * cases}, {"violations", bad}, {"quad_flagged", flagged}};
  }

  if (suite == "tv" || suite == "all") {
    csv::Writer w(dir + "/tv.csv", {"case", "d", "delta", "sigma", "exact_tv", "numeric_tv",
                                    "abs_error"});
    auto eng = rng::engine(rng::derive(cfg.seed, 0x72));
    int bad = 0;
    double worst = 0.0;
    for (int i = 0; i < cases; ++i) {
      const int d = cfg.theory.dims[i % cfg.theory.dims.size()];
      const double sigma = 0.05 + 2.95 * rng::uniform(eng, 0.0, 1.0);
      Eigen::VectorXd mu1(d), mu2(d);
      for (int k = 0; k < d; ++k) {
        mu1[k] = 6.0 * rng::uniform(eng, 0.0, 1.0) - 3.0;
        mu2[k] = 6.0 * rng::uniform(eng, 0.0, 1.0) - 3.0;
      }
      const double exact = regretlab::tv_gaussian_shared_cov(mu1, mu2, sigma);
      const double numeric =
          0.5 * regretlab::numeric_l1_shifted(regretlab::NoiseFamily::gaussian, sigma,
                                              (mu1 - mu2).norm());
      const double err = std::abs(exact - numeric);
      worst = std::max(worst, err);
      bad += err > 1e-6 ? 1 : 0;
      w.row_nums({static_cast<double>(i), static_cast<double>(d), (mu1 - mu2).norm(), sigma,
                  exact, numeric, err});
    }
    w.close();
    man.add("tv.csv");
    violations += bad;
    details["tv"] = json{{"cases", cases}, {"violations", bad}, {"max_abs_error", worst}};
  }

  if (suite == "variance" || suite == "all") {
    csv::Writer w(dir + "/variance.csv", {"d", "episode", "s2", "sum", "bound"});
    json per_d = json::array();
    for (int d : cfg.theory.dims) {
      const int n = std::max(10, cases);
      const auto res = regretlab::variance_sum_experiment(d, n, rng::derive(cfg.seed, 0x73, d));
      int bad = res.pointwise_ok ? 0 : 1;
      for (std::size_t k = 0; k < res.sum_curve.size(); ++k) {
        if (res.sum_curve[k] > res.bound_curve[k] + 1e-9) ++bad;
        w.row_nums({static_cast<double>(d), static_cast<double>(k + 1), res.variances[k],
                    res.sum_curve[k], res.bound_curve[k]});
      }
      violations += bad;
      per_d.push_back(json{{"d", d},
                           {"episodes", n},
                           {"violations", bad},
                           {"sum", res.sum},
                           {"bound", res.bound}});
    }
    w.close();
    man.add("variance.csv");
    details["variance"] = per_d;
  }

  if (suite == "concentration" || suite == "all") {
    auto eng = rng::engine(rng::derive(cfg.seed, 0x74));
    const int d_phi = 8, d_s = 3, n_data = 60, n_query = 25;
    Eigen::MatrixXd phi(n_data, d_phi), y(n_data, d_s);
    for (int i = 0; i < n_data; ++i) {
      for (int j = 0; j < d_phi; ++j) phi(i, j) = rng::normal(eng);
      for (int j = 0; j < d_s; ++j) y(i, j) = rng::normal(eng);
    }
    bayes::GaussianLinearPrior prior;
    prior.covariance = Eigen::MatrixXd::Identity(d_phi, d_phi);
    prior.noise_variance = 0.04;
    const auto post = bayes::GaussianLinearPosterior::from_data(prior, phi, y);
    Eigen::MatrixXd queries(n_query, d_phi);
    for (int i = 0; i < n_query; ++i)
      for (int j = 0; j < d_phi; ++j) queries(i, j) = rng::normal(eng);
    const long n_trials = std::max(10000L, 10L * static_cast<long>(cases));
    const auto res = regretlab::concentration_check(post, queries, 0.05, n_trials, eng);
    violations += res.holds ? 0 : 1;
    details["concentration"] = json{{"trials", res.n_trials},
                                    {"coverage", res.coverage},
                                    {"threshold", res.threshold},
                                    {"violations", res.holds ? 0 : 1}};
  }

  json summary{{"suite", suite}, {"cases", cases}, {"violations", violations},
               {"details", details}};
  write_text_atomic(dir + "/summary.json", summary.dump(2) + "\n");
  man.add("summary.json");
  man.status = "complete";
  man.finished = timestamp_utc();
  man.write();
  std::cout << "theory suite '" << suite << "': violations = " << violations << "\n";
  return 0;
}

}  // namespace

void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* out = std::getenv("PSRL_OUT"); out != nullptr && *out != '\0')
    cfg.out_dir = out;
  if (const char* w = std::getenv("PSRL_WORKERS"); w != nullptr && *w != '\0') {
    char* end = nullptr;
    const long v = std::strtol(w, &end, 10);
    if (end == w || *end != '\0' || v < 0)
      throw ConfigError("PSRL_WORKERS", "must be a non-negative integer");
    cfg.workers = static_cast<int>(v);
  }
}

int cmd_run(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (cfg.kind == "train") return run_train(cfg, opts);
  if (cfg.kind == "regret") return run_regret(cfg);
  return run_theory(cfg);
}

int cmd_resume(const std::string& path) {
  std::string dir;
  std::string single_file;
  if (fs::is_directory(path)) {
    dir = path;
  } else if (fs::is_regular_file(path)) {
    single_file = path;
    dir = fs::path(path).parent_path().string();
    if (dir.empty()) dir = ".";
  } else {
    std::cerr << "error: no such checkpoint file or run directory: " << path << "\n";
    return 1;
  }

  // Config source: config.json in the run dir, else the named checkpoint.
  ExperimentConfig cfg;
  const std::string cfg_path = dir + "/config.json";
  if (fs::exists(cfg_path)) {
    cfg = ExperimentConfig::from_file(cfg_path);
  } else if (!single_file.empty()) {
    cfg = open_checkpoint(single_file).config;
  } else {
    std::cerr << "error: " << dir << " has no config.json; cannot resume\n";
    return 1;
  }
  if (cfg.kind != "train") {
    std::cerr << "error: only training runs are resumable (kind is '" << cfg.kind << "')\n";
    return 1;
  }

  // Restore or freshly create each trial, then bring them all to target.
  struct Slot {
    std::unique_ptr<envs::Environment> env;
    std::unique_ptr<agent::Trainer> trainer;
  };
  std::vector<Slot> slots(cfg.n_trials);
  bool all_done = true;
  for (int t = 0; t < cfg.n_trials; ++t) {
    slots[t].env = envs::make_env(cfg.train.env.name, cfg.train.env.params());
    const std::string cp = ckpt_path(dir, t);
    if (fs::exists(cp)) {
      LoadedCheckpoint lc = open_checkpoint(cp);
      if (lc.config.config_hash() != cfg.config_hash())
        throw CheckpointError("checkpoint " + cp + " does not match " + cfg_path);
      if (lc.trial != t) throw CheckpointError("checkpoint " + cp + " has wrong trial index");
      slots[t].trainer = std::make_unique<agent::Trainer>(restore_trainer(lc, *slots[t].env));
    } else {
      slots[t].trainer = std::make_unique<agent::Trainer>(
          *slots[t].env, cfg.agent_config(cfg.trial_seed(t), slots[t].env->spec()));
    }
    if (slots[t].trainer->episodes_done() < cfg.train.episodes) all_done = false;
  }
  if (all_done) {
    std::cout << "run already complete (" << cfg.n_trials << " trials x " << cfg.train.episodes
              << " episodes); nothing to do\n";
    return 0;
  }

  Manifest man;
  man.cfg = &cfg;
  man.run_dir = dir;
  man.started = timestamp_utc();
  man.add("manifest.json");
  man.add("config.json");
  man.write();

  std::vector<std::string> errors(cfg.n_trials);
  parallel_for(cfg.n_trials, cfg.workers, [&](int t) {
    try {
      continue_trial(cfg, dir, t, *slots[t].trainer, cfg.train.episodes);
      write_trial_csv(dir, t, slots[t].trainer->records());
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });
  for (int t = 0; t < cfg.n_trials; ++t) {
    if (!errors[t].empty()) {
      man.status = "failed";
      man.finished = timestamp_utc();
      man.write();
      std::cerr << "error: trial " << t << " failed: " << errors[t] << "\n";
      return 1;
    }
  }
  merge_trial_csvs(dir, cfg.n_trials);
  man.add("episodes.csv");
  for (int t = 0; t < cfg.n_trials; ++t) man.add("trial_" + std::to_string(t) + ".ckpt");
  man.status = "complete";
  man.finished = timestamp_utc();
  man.write();
  std::cout << "resumed to " << cfg.train.episodes << " episodes; wrote " << dir
            << "/episodes.csv\n";
  return 0;
}

int cmd_report(const std::string& run_dir) {
  if (!fs::is_directory(run_dir)) {
    std::cerr << "error: no such run directory: " << run_dir << "\n";
    return 1;
  }
  const std::string man_path = run_dir + "/manifest.json";
  if (!fs::exists(man_path)) {
    std::cerr << "error: " << run_dir << " has no manifest.json; not a run directory\n";
    return 1;
  }
  json man;
  {
    std::ifstream in(man_path, std::ios::binary);
    try {
      in >> man;
    } catch (const std::exception& e) {
      std::cerr << "error: cannot parse " << man_path << ": " << e.what() << "\n";
      return 1;
    }
  }
  std::vector<std::string> new_files;

  if (fs::exists(run_dir + "/episodes.csv")) {
    const csv::Table t = csv::read(run_dir + "/episodes.csv");
    for (const std::string metric : {"total_reward", "mean_pred_variance"}) {
      const SeriesStat s = aggregate_by_key(t, "episode", metric);
      write_series_csv(run_dir + "/report_" + metric + ".csv", "episode", metric, s);
      write_line_svg(run_dir + "/report_" + metric + ".svg", s, metric + " (mean over trials)",
                     "episode", metric);
      new_files.push_back("report_" + metric + ".csv");
      new_files.push_back("report_" + metric + ".svg");
      std::cout << "wrote report_" << metric << ".csv/.svg\n";
    }
  }

  if (fs::exists(run_dir + "/regret.csv")) {
    const csv::Table t = csv::read(run_dir + "/regret.csv");
    const int ct = t.col("T"), cr = t.col("regret"), cs = t.col("stderr");
    if (ct < 0 || cr < 0 || cs < 0) {
      std::cerr << "error: regret.csv is missing T/regret/stderr columns\n";
      return 1;
    }
    SeriesStat s;
    csv::Writer w(run_dir + "/report_regret_sqrt.csv",
                  {"T", "regret", "stderr", "sqrt_T", "regret_over_sqrt_T"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double T = t.num(i, ct), reg = t.num(i, cr), se = t.num(i, cs);
      w.row_nums({T, reg, se, std::sqrt(T), T > 0.0 ? reg / std::sqrt(T) : 0.0});
      s.x.push_back(T);
      s.mean.push_back(reg);
      s.sd.push_back(se);
    }
    w.close();
    write_line_svg(run_dir + "/report_regret.svg", s, "cumulative regret (mean over draws)", "T",
                   "regret");
    new_files.push_back("report_regret_sqrt.csv");
    new_files.push_back("report_regret.svg");
    std::cout << "wrote report_regret_sqrt.csv and report_regret.svg\n";
  }

  if (new_files.empty()) {
    std::cout << "no per-episode or regret tables in " << run_dir << "; nothing to aggregate\n";
    return 0;
  }

  // Keep the manifest inventory complete.
  std::vector<std::string> inv;
  if (man.contains("inventory"))
    for (const auto& e : man.at("inventory")) inv.push_back(e.get<std::string>());
  for (const auto& f : new_files)
    if (std::find(inv.begin(), inv.end(), f) == inv.end()) inv.push_back(f);
  std::sort(inv.begin(), inv.end());
  man["inventory"] = inv;
  write_text_atomic(man_path, man.dump(2) + "\n");
  return 0;
}

}  // namespace psrl::cli
