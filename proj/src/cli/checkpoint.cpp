#include "psrl/cli/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "psrl/common/serialize.hpp"
#include "psrl/common/version.hpp"

namespace psrl::cli {
namespace {

constexpr std::uint64_t kMagic = 0x54504b434c525350ULL;  // "PSRLCKPT" little-endian

}  // namespace

void write_checkpoint(const std::string& path, const ExperimentConfig& cfg, int trial,
                      const agent::Trainer& trainer) {
  std::ostringstream payload_stream;
  ser::Writer payload_writer(payload_stream);
  trainer.save(payload_writer);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open checkpoint file for writing: " + tmp);
    ser::Writer w(out);
    w.u64(kMagic);
    w.u32(psrl::kCheckpointFormatVersion);
    w.str(psrl::kCodeVersion);
    w.u64(cfg.config_hash());
    w.str(cfg.to_json_text());
    w.u32(static_cast<std::uint32_t>(trial));
    w.u32(static_cast<std::uint32_t>(trainer.episodes_done()));
    w.str(payload_stream.str());
    w.u64(w.hash());
    out.flush();
    if (!out) throw CheckpointError("write failed for checkpoint file: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint open_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint file: " + path);
  ser::Reader r(in);
  LoadedCheckpoint out;
  try {
    if (r.u64() != kMagic) throw CheckpointError("not a checkpoint file: " + path);
    const std::uint32_t fmt = r.u32();
    if (fmt != psrl::kCheckpointFormatVersion)
      throw CheckpointError("unsupported checkpoint format version " + std::to_string(fmt) +
                            " (expected " + std::to_string(psrl::kCheckpointFormatVersion) +
                            "): " + path);
    const std::string code_version = r.str();
    if (code_version != psrl::kCodeVersion)
      throw CheckpointError("checkpoint written by code version " + code_version +
                            ", this binary is " + std::string(psrl::kCodeVersion) + ": " + path);
    const std::uint64_t stored_cfg_hash = r.u64();
    const std::string cfg_json = r.str();
    try {
      out.config = ExperimentConfig::from_json_text(cfg_json);
    } catch (const ConfigError& e) {
      throw CheckpointError(std::string("embedded config is invalid (") + e.what() +
                            "): " + path);
    }
    if (out.config.config_hash() != stored_cfg_hash)
      throw CheckpointError("config hash mismatch (embedded config does not match hash): " + path);
    out.trial = static_cast<int>(r.u32());
    out.episodes_done = static_cast<int>(r.u32());
    out.payload = r.str();
    const std::uint64_t expected = r.hash();
    const std::uint64_t stored = r.u64();
    if (stored != expected) throw CheckpointError("integrity hash mismatch (corrupted): " + path);
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("corrupted checkpoint (") + e.what() + "): " + path);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw CheckpointError("trailing bytes after checkpoint payload: " + path);
  return out;
}

agent::Trainer restore_trainer(const LoadedCheckpoint& ckpt, const envs::Environment& env) {
  std::istringstream ps(ckpt.payload);
  ser::Reader pr(ps);
  agent::AgentConfig ac =
      ckpt.config.agent_config(ckpt.config.trial_seed(ckpt.trial), env.spec());
  try {
    return agent::Trainer::load(pr, env, ac);
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("corrupted checkpoint payload (") + e.what() + ")");
  }
}

}  // namespace psrl::cli
