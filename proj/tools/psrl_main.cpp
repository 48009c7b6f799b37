#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "psrl/cli/checkpoint.hpp"
#include "psrl/cli/config.hpp"
#include "psrl/cli/runner.hpp"
#include "psrl/common/version.hpp"

namespace {

bool is_kind(const std::string& s) { return s == "train" || s == "regret" || s == "theory"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posterior-sampling RL experiments: training, regret studies, theory checks"};
  app.set_version_flag("--version", std::string(psrl::kCodeVersion));
  app.require_subcommand(1);

  std::string run_target;
  std::uint64_t seed = 0;
  std::string out_dir, env_name, suite;
  int workers = 0, episodes = 0, trials = 0, cases = 0, stop_after = -1;
  CLI::App* run = app.add_subcommand("run", "execute a run from a config file or a kind name");
  run->add_option("config", run_target,
                  "path to a config JSON, or one of: train, regret, theory")
      ->required();
  auto* o_seed = run->add_option("--seed", seed, "master seed");
  auto* o_out = run->add_option("--out", out_dir, "output directory");
  auto* o_workers = run->add_option("--workers", workers, "worker threads (0 = all cores)");
  auto* o_env = run->add_option("--env", env_name, "environment: cartpole, pendulum, synthetic");
  auto* o_episodes = run->add_option("--episodes", episodes, "episodes per trial (or per draw)");
  auto* o_trials = run->add_option("--trials", trials, "independent trials");
  auto* o_suite = run->add_option("--suite", suite,
                                  "theory suite: lemma1, tv, variance, concentration, all");
  auto* o_cases = run->add_option("--cases", cases, "random cases per theory suite");
  run->add_option("--stop-after", stop_after,
                  "stop training after this many episodes (leaves the run resumable)");

  std::string resume_target;
  CLI::App* resume = app.add_subcommand("resume", "resume an interrupted training run");
  resume->add_option("checkpoint", resume_target, "checkpoint file or run directory")->required();

  std::string report_target;
  CLI::App* report = app.add_subcommand("report", "aggregate a run directory into tables and charts");
  report->add_option("dir", report_target, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad usage is a schema violation
  }

  try {
    if (run->parsed()) {
      psrl::cli::ExperimentConfig cfg;
      if (is_kind(run_target)) {
        const std::string env = o_env->count() ? env_name : "cartpole";
        cfg = psrl::cli::ExperimentConfig::defaults_for(run_target, env);
        if (o_seed->count()) cfg.seed = seed;
        cfg.out_dir = "runs/" + run_target +
                      (run_target == "train" ? "-" + cfg.train.env.name : "") + "-seed" +
                      std::to_string(cfg.seed);
      } else {
        if (!std::filesystem::exists(run_target))
          throw psrl::cli::ConfigError("<file>",
                                       "no such config file or kind name: " + run_target);
        cfg = psrl::cli::ExperimentConfig::from_file(run_target);
        if (o_seed->count()) cfg.seed = seed;
        if (o_env->count()) cfg.train.env.name = env_name;
      }
      psrl::cli::apply_env_overrides(cfg);
      if (o_out->count()) cfg.out_dir = out_dir;
      if (o_workers->count()) cfg.workers = workers;
      if (o_trials->count()) cfg.n_trials = trials;
      if (o_episodes->count()) {
        if (cfg.kind == "regret") cfg.regret.episodes = episodes;
        else cfg.train.episodes = episodes;
      }
      if (o_suite->count()) cfg.theory.suite = suite;
      if (o_cases->count()) cfg.theory.cases = cases;
      cfg.validate();
      psrl::cli::RunOptions opts;
      opts.stop_after = stop_after;
      return psrl::cli::cmd_run(cfg, opts);
    }
    if (resume->parsed()) return psrl::cli::cmd_resume(resume_target);
    return psrl::cli::cmd_report(report_target);
  } catch (const psrl::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const psrl::cli::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
