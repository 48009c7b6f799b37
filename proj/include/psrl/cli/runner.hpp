#pragma once

#include <string>

#include "psrl/cli/config.hpp"

namespace psrl::cli {

struct RunOptions {
  // Stop training trials after this many episodes (< configured total) to
  // simulate an interruption; the run directory is left resumable. -1 = off.
  int stop_after = -1;
};

// Executes a run of cfg.kind into cfg.out_dir. Returns a process exit code.
int cmd_run(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Resumes a training run from a checkpoint file or a run directory; brings
// every trial to the configured episode count. No-op (exit 0) when finished.
int cmd_resume(const std::string& path);

// Aggregates per-episode CSVs across trials into (key, mean, std) tables and
// SVG charts; regret runs also get a cumulative-regret vs sqrt(T) table.
int cmd_report(const std::string& run_dir);

// Environment overrides: PSRL_OUT replaces out_dir, PSRL_WORKERS replaces
// workers. Nothing else is overridable from the environment.
void apply_env_overrides(ExperimentConfig& cfg);

}  // namespace psrl::cli
