#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pdet/corpus.hpp"
#include "pdet/detector.hpp"
#include "pdet/rlcontrol.hpp"

namespace pdet {

enum class Regime { dpnet, baseline, fixed_noise, two_step };

const char* regime_name(Regime regime);
Regime regime_from_name(const std::string& name);  // throws listing valid ones

struct TrainConfig {
  Regime regime = Regime::dpnet;
  int max_episode = 30;
  int max_step = 10;
  LossWeights loss_weights;
  double epsilon = 1.0;  // reward threshold
  double reward_max = 10.0;
  NoiseState initial_noise;  // carries family and bounds
  double lr_encoder = 8e-5;
  double lr_decay = 0.995;  // per-episode factor for all optimizers
  int batch_budget = 0;     // samples consumed per RL step; 0 = full pass
  std::size_t rl_batch = 64;
  int rl_warmup_factor = 5;  // agent updates start at warmup_factor * batch
  std::size_t rl_capacity = 10000;
  AgentConfig agent;  // lr here is the actor/critic rate (3e-4 default)
  FeaturizerConfig featurizer;
  std::size_t repr_dim = 32;
  std::size_t hidden = 64;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// One training step as persisted history: the state the step's noise was
// drawn under, the action that produced it, and the step's reward and mean
// loss. Regimes without an agent record zero deltas.
struct HistoryRow {
  int episode = 0;
  int step = 0;
  double mu = 0.0;
  double sigma = 0.0;
  double d_mu = 0.0;
  double d_sigma = 0.0;
  double reward = 0.0;
  double mean_loss = 0.0;

  bool operator==(const HistoryRow&) const = default;
};

// Agent parameters as persisted (replay buffer and optimizer state excluded).
struct AgentSnapshot {
  Mlp actor;
  Mlp critic;
  Mlp actor_target;
  Mlp critic_target;
  AgentConfig config;

  bool operator==(const AgentSnapshot&) const = default;
};

struct Checkpoint {
  DetectorModel detector;
  std::optional<AgentSnapshot> agent;
  TrainConfig config;
  NoiseState final_noise;
  std::vector<HistoryRow> history;
  std::uint64_t transitions_stored = 0;
};

// Algorithm regimes. Each is deterministic in (config, corpus).
Checkpoint train_dpnet(const TrainConfig& config, const Corpus& corpus);
Checkpoint train_baseline(const TrainConfig& config, const Corpus& corpus);
Checkpoint train_fixed_noise(const TrainConfig& config, const Corpus& corpus);
Checkpoint train_two_step(const TrainConfig& config, const Corpus& corpus);
// dispatch on config.regime
Checkpoint train(const TrainConfig& config, const Corpus& corpus);

// Versioned binary container: magic + version header, then length-prefixed
// named sections (shape-tagged little-endian f64 arrays, one JSON metadata
// section). Round-trips bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// columns: episode,step,mu,sigma,d_mu,d_sigma,reward,mean_loss
void write_history_csv(const Checkpoint& ckpt,
                       const std::filesystem::path& path);

bool checkpoint_equal(const Checkpoint& a, const Checkpoint& b);

}  // namespace pdet
