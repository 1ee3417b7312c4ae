#include "pdet/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pdet/featurizer.hpp"
#include "pdet/textio.hpp"

namespace pdet {

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::dpnet: return "dpnet";
    case Regime::baseline: return "baseline";
    case Regime::fixed_noise: return "fixed_noise";
    case Regime::two_step: return "two_step";
  }
  return "dpnet";
}

Regime regime_from_name(const std::string& name) {
  if (name == "dpnet") return Regime::dpnet;
  if (name == "baseline") return Regime::baseline;
  if (name == "fixed_noise") return Regime::fixed_noise;
  if (name == "two_step") return Regime::two_step;
  throw std::invalid_argument(
      "unknown regime '" + name +
      "' (valid: dpnet, baseline, fixed_noise, two_step)");
}

void TrainConfig::validate() const {
  if (max_episode < 1 || max_step < 1)
    throw std::invalid_argument("max_episode and max_step must be >= 1");
  loss_weights.validate();
  initial_noise.validate();
  if (lr_encoder <= 0.0 || agent.lr <= 0.0)
    throw std::invalid_argument("learning rates must be positive");
  if (lr_decay <= 0.0 || lr_decay > 1.0)
    throw std::invalid_argument("lr_decay must be in (0,1]");
  if (batch_budget < 0)
    throw std::invalid_argument("batch_budget must be >= 0");
  if (rl_batch < 1) throw std::invalid_argument("rl_batch must be >= 1");
  if (rl_warmup_factor < 1)
    throw std::invalid_argument("rl_warmup_factor must be >= 1");
  if (reward_max <= 0.0)
    throw std::invalid_argument("reward_max must be positive");
  featurizer.validate();
  if (repr_dim < 1 || hidden < 1)
    throw std::invalid_argument("repr_dim and hidden must be >= 1");
}

namespace {

void require_both_classes(const Corpus& corpus) {
  bool seen[2] = {false, false};
  for (const Sample& s : corpus.samples) seen[s.label] = true;
  if (corpus.empty() || !seen[0] || !seen[1])
    throw std::invalid_argument(
        "training corpus must contain both classes (corpus '" + corpus.name +
        "')");
}

// Shared training state: frozen featurizer, cached clean embeddings, the
// detector with its two optimizers, and a cursor walking the corpus in order.
struct Session {
  const TrainConfig& cfg;
  const Corpus& corpus;
  Featurizer featurizer;
  std::vector<EmbeddingMatrix> embeddings;
  std::vector<int> labels;
  DetectorModel model;
  AdamState extractor_opt;
  AdamState head_opt;
  rng::Stream noise_rs;
  std::size_t cursor = 0;

  Session(const TrainConfig& config, const Corpus& data)
      : cfg(config),
        corpus(data),
        featurizer(config.featurizer),
        noise_rs(rng::substream(config.seed, "noise")) {
    config.validate();
    require_both_classes(data);
    rng::Stream init_rs = rng::substream(config.seed, "detector_init");
    model = DetectorModel::init(config.featurizer, config.repr_dim,
                                config.hidden, init_rs);
    extractor_opt =
        AdamState::init(model.extractor, config.lr_encoder, config.lr_decay);
    head_opt = AdamState::init(model.head, config.lr_encoder, config.lr_decay);
    embeddings.reserve(data.size());
    labels.reserve(data.size());
    for (const Sample& s : data.samples) {
      embeddings.push_back(featurizer.embed(s.text));
      labels.push_back(s.label);
    }
  }

  std::size_t step_budget() const {
    return cfg.batch_budget > 0 ? static_cast<std::size_t>(cfg.batch_budget)
                                : corpus.size();
  }

  void set_epoch(int episode) {
    extractor_opt.epoch = episode;
    head_opt.epoch = episode;
  }

  // One pass over the step's batch: sample noise under `state`, accumulate
  // losses, optionally update the detector per sample. Returns the mean
  // total loss.
  double run_step_batch(const NoiseState& state, bool update_detector) {
    const std::size_t budget = step_budget();
    double loss_sum = 0.0;
    DetectorGrads grads = DetectorGrads::zeros_like(model);
    for (std::size_t k = 0; k < budget; ++k) {
      const std::size_t i = cursor;
      cursor = (cursor + 1) % corpus.size();
      const EmbeddingMatrix& clean = embeddings[i];
      const Matrix noise =
          sample_noise(state, clean.rows, clean.cols, noise_rs);
      const EmbeddingMatrix noisy = inject(clean, noise);
      const LossBreakdown loss = grad_total_loss(
          model, clean, noisy, labels[i], cfg.loss_weights, grads);
      loss_sum += loss.total;
      if (update_detector) {
        adam_step(model.extractor, grads.extractor, extractor_opt);
        adam_step(model.head, grads.head, head_opt);
      }
    }
    return loss_sum / static_cast<double>(budget);
  }

  // Clean-only pass (lambda2 = lambda3 = 0): no noise branch at all.
  double run_step_batch_clean(bool update_detector) {
    const std::size_t budget = step_budget();
    const LossWeights weights = {cfg.loss_weights.lambda1, 0.0, 0.0};
    double loss_sum = 0.0;
    DetectorGrads grads = DetectorGrads::zeros_like(model);
    for (std::size_t k = 0; k < budget; ++k) {
      const std::size_t i = cursor;
      cursor = (cursor + 1) % corpus.size();
      const EmbeddingMatrix& clean = embeddings[i];
      const LossBreakdown loss = grad_total_loss(
          model, clean, clean, labels[i], weights, grads);
      loss_sum += loss.total;
      if (update_detector) {
        adam_step(model.extractor, grads.extractor, extractor_opt);
        adam_step(model.head, grads.head, head_opt);
      }
    }
    return loss_sum / static_cast<double>(budget);
  }

  Checkpoint finish(std::optional<AgentSnapshot> agent, NoiseState final_noise,
                    std::vector<HistoryRow> history,
                    std::uint64_t transitions) const {
    Checkpoint ckpt;
    ckpt.detector = model;
    ckpt.agent = std::move(agent);
    ckpt.config = cfg;
    ckpt.final_noise = final_noise;
    ckpt.history = std::move(history);
    ckpt.transitions_stored = transitions;
    return ckpt;
  }
};

AgentSnapshot snapshot(const AgentModel& agent) {
  return {agent.actor, agent.critic, agent.actor_target, agent.critic_target,
          agent.config};
}

// The dpnet loop, with the detector optionally frozen (two_step phase 1 runs
// the same loop against the fixed initial detector).
Checkpoint run_rl_loop(Session& session, bool update_detector,
                       std::vector<HistoryRow>* history_out,
                       NoiseState* best_state_out) {
  const TrainConfig& cfg = session.cfg;
  AgentConfig agent_cfg = cfg.agent;
  agent_cfg.lr_decay = cfg.lr_decay;
  rng::Stream agent_init = rng::substream(cfg.seed, "agent_init");
  AgentModel agent =
      AgentModel::init(agent_cfg, cfg.initial_noise.bounds, agent_init);
  rng::Stream explore_rs = rng::substream(cfg.seed, "explore");
  rng::Stream replay_rs = rng::substream(cfg.seed, "replay");
  ReplayBuffer<Transition> replay(cfg.rl_capacity);
  const std::size_t warmup =
      static_cast<std::size_t>(cfg.rl_warmup_factor) * cfg.rl_batch;

  std::vector<HistoryRow> history;
  NoiseState s = cfg.initial_noise;
  NoiseState best_state = s;
  double best_reward = -std::numeric_limits<double>::infinity();
  std::uint64_t transitions = 0;

  for (int episode = 0; episode < cfg.max_episode; ++episode) {
    session.set_epoch(episode);
    agent.on_episode(episode);
    for (int step = 0; step < cfg.max_step; ++step) {
      const Action a = select_action(agent, s, /*explore=*/true, explore_rs);
      const NoiseState s_next = apply_action(s, a);
      const double mean_loss =
          session.run_step_batch(s_next, update_detector);
      const double r = reward(mean_loss, cfg.epsilon, cfg.reward_max);
      replay.push({s, a, r, s_next});
      ++transitions;
      if (r > best_reward) {
        best_reward = r;
        best_state = s_next;
      }
      if (replay.size() >= warmup) {
        const std::vector<Transition> batch =
            replay.sample(cfg.rl_batch, replay_rs);
        critic_update(agent, batch);
        actor_update(agent, batch);
        soft_update_targets(agent);
      }
      history.push_back({episode, step, s_next.mu, s_next.sigma, a[0], a[1], r,
                         mean_loss});
      s = s_next;
    }
  }

  if (history_out) *history_out = history;
  if (best_state_out) *best_state_out = best_state;
  return session.finish(snapshot(agent), s, std::move(history), transitions);
}

}  // namespace

Checkpoint train_dpnet(const TrainConfig& config, const Corpus& corpus) {
  if (config.regime != Regime::dpnet)
    throw std::invalid_argument("train_dpnet: config regime mismatch");
  Session session(config, corpus);
  return run_rl_loop(session, /*update_detector=*/true, nullptr, nullptr);
}

Checkpoint train_baseline(const TrainConfig& config, const Corpus& corpus) {
  if (config.regime != Regime::baseline)
    throw std::invalid_argument("train_baseline: config regime mismatch");
  Session session(config, corpus);
  std::vector<HistoryRow> history;
  for (int episode = 0; episode < config.max_episode; ++episode) {
    session.set_epoch(episode);
    for (int step = 0; step < config.max_step; ++step) {
      const double mean_loss = session.run_step_batch_clean(true);
      const double r = reward(mean_loss, config.epsilon, config.reward_max);
      history.push_back({episode, step, 0.0, 0.0, 0.0, 0.0, r, mean_loss});
    }
  }
  return session.finish(std::nullopt, config.initial_noise, std::move(history),
                        0);
}

Checkpoint train_fixed_noise(const TrainConfig& config, const Corpus& corpus) {
  if (config.regime != Regime::fixed_noise)
    throw std::invalid_argument("train_fixed_noise: config regime mismatch");
  Session session(config, corpus);
  std::vector<HistoryRow> history;
  const NoiseState s = config.initial_noise;
  for (int episode = 0; episode < config.max_episode; ++episode) {
    session.set_epoch(episode);
    for (int step = 0; step < config.max_step; ++step) {
      const double mean_loss = session.run_step_batch(s, true);
      const double r = reward(mean_loss, config.epsilon, config.reward_max);
      history.push_back({episode, step, s.mu, s.sigma, 0.0, 0.0, r, mean_loss});
    }
  }
  return session.finish(std::nullopt, s, std::move(history), 0);
}

Checkpoint train_two_step(const TrainConfig& config, const Corpus& corpus) {
  if (config.regime != Regime::two_step)
    throw std::invalid_argument("train_two_step: config regime mismatch");
  Session session(config, corpus);

  // phase 1: detector frozen, agent explores; keep the state with the best
  // recorded reward (earliest on ties, which run_rl_loop's strict > gives us)
  std::vector<HistoryRow> phase1;
  NoiseState best = config.initial_noise;
  Checkpoint phase1_ckpt =
      run_rl_loop(session, /*update_detector=*/false, &phase1, &best);

  // phase 2: plain noise-enhanced training pinned at the best state
  std::vector<HistoryRow> history = std::move(phase1);
  session.cursor = 0;
  for (int episode = 0; episode < config.max_episode; ++episode) {
    session.set_epoch(episode);
    for (int step = 0; step < config.max_step; ++step) {
      const double mean_loss = session.run_step_batch(best, true);
      const double r = reward(mean_loss, config.epsilon, config.reward_max);
      history.push_back({config.max_episode + episode, step, best.mu,
                         best.sigma, 0.0, 0.0, r, mean_loss});
    }
  }
  return session.finish(std::move(phase1_ckpt.agent), best, std::move(history),
                        phase1_ckpt.transitions_stored);
}

Checkpoint train(const TrainConfig& config, const Corpus& corpus) {
  switch (config.regime) {
    case Regime::dpnet: return train_dpnet(config, corpus);
    case Regime::baseline: return train_baseline(config, corpus);
    case Regime::fixed_noise: return train_fixed_noise(config, corpus);
    case Regime::two_step: return train_two_step(config, corpus);
  }
  throw std::invalid_argument("train: invalid regime");
}

void write_history_csv(const Checkpoint& ckpt,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  out << "episode,step,mu,sigma,d_mu,d_sigma,reward,mean_loss\n";
  for (const HistoryRow& r : ckpt.history) {
    out << r.episode << ',' << r.step << ',' << textio::fmt(r.mu) << ','
        << textio::fmt(r.sigma) << ',' << textio::fmt(r.d_mu) << ','
        << textio::fmt(r.d_sigma) << ',' << textio::fmt(r.reward) << ','
        << textio::fmt(r.mean_loss) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace pdet
