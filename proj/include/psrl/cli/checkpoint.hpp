#pragma once

#include <stdexcept>
#include <string>

#include "psrl/agent/trainer.hpp"
#include "psrl/cli/config.hpp"

namespace psrl::cli {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedCheckpoint {
  ExperimentConfig config;
  int trial = 0;
  int episodes_done = 0;
  std::string payload;  // serialized trainer state, integrity-verified
};

// Versioned binary container: magic, format version, code version, config
// hash, full config JSON, trial index, trainer payload, trailing FNV-1a hash
// of everything before it. Written atomically (tmp file + rename).
void write_checkpoint(const std::string& path, const ExperimentConfig& cfg, int trial,
                      const agent::Trainer& trainer);

// Reads and fully verifies a checkpoint; throws CheckpointError on a missing
// file, bad magic, version mismatch, config-hash mismatch, or corruption.
LoadedCheckpoint open_checkpoint(const std::string& path);

// Reconstructs the trainer from an opened checkpoint (env must be built from
// checkpoint.config).
agent::Trainer restore_trainer(const LoadedCheckpoint& ckpt, const envs::Environment& env);

}  // namespace psrl::cli
