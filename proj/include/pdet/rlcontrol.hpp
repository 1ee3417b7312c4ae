#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pdet/neuralcore.hpp"
#include "pdet/perturb.hpp"
#include "pdet/rng.hpp"

namespace pdet {

// Loss-shaped reward: -log(L - eps) above the threshold (clamped at r_max),
// exp(eps - L) at or below it. Strictly decreasing in L on each branch, so
// the agent is paid most for holding the loss just above eps.
double reward(double loss, double epsilon, double r_max = 10.0);

using Action = std::array<double, 2>;  // (d_mu, d_sigma)

struct Transition {
  NoiseState s;
  Action a;
  double r = 0.0;
  NoiseState s_next;
};

// Fixed-capacity ring; uniform without-replacement sampling.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0)
      throw std::invalid_argument("replay capacity must be > 0");
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);
      next_ = (next_ + 1) % capacity_;
    }
    ++inserted_;
  }

  std::vector<T> sample(std::size_t batch, rng::Stream& rs) const {
    if (batch == 0 || batch > items_.size())
      throw std::invalid_argument("replay sample: batch size " +
                                  std::to_string(batch) +
                                  " exceeds buffer size " +
                                  std::to_string(items_.size()));
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < batch; ++i) {
      const std::size_t j = i + rs.below(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    std::vector<T> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) out.push_back(items_[idx[i]]);
    return out;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t inserted() const { return inserted_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::uint64_t inserted_ = 0;
  std::vector<T> items_;
};

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  double lr_decay = 1.0;
  double action_bound = 0.05;
  double explore_std = 0.01;
  double explore_decay = 0.99;
  std::size_t hidden = 64;
  bool operator==(const AgentConfig&) const = default;
};

// DDPG: deterministic actor, Q critic, slow-moving target copies.
// The nets see states normalized to [-1,1] by the noise bounds and actions
// normalized by the action bound.
struct AgentModel {
  Mlp actor;          // 2 -> hidden relu -> hidden relu -> 2 tanh
  Mlp critic;         // 4 -> hidden relu -> hidden relu -> 1 linear
  Mlp actor_target;
  Mlp critic_target;
  AdamState actor_opt;
  AdamState critic_opt;
  AgentConfig config;
  NoiseBounds bounds;
  double explore_std_now = 0.01;

  static AgentModel init(const AgentConfig& config, const NoiseBounds& bounds,
                         rng::Stream& rs);
  // apply per-episode schedules (lr decay, exploration decay)
  void on_episode(int episode);
};

std::array<double, 2> normalize_state(const NoiseState& s);

Action select_action(const AgentModel& agent, const NoiseState& s,
                     bool explore, rng::Stream& rs);

// clip-add the deltas inside the state bounds
NoiseState apply_action(const NoiseState& s, const Action& a);

// y_i = r_i + gamma * Q'(s'_i, nu'(s'_i))
std::vector<double> bellman_target(const std::vector<Transition>& batch,
                                   const AgentModel& agent);

// One Adam step on the mean squared Bellman error; returns the loss before
// the step.
double critic_update(AgentModel& agent, const std::vector<Transition>& batch);

// One Adam ascent step on E[Q(s, nu(s))] (critic frozen); returns the mean Q
// before the step.
double actor_update(AgentModel& agent, const std::vector<Transition>& batch);

// soft-update both target networks with config.tau
void soft_update_targets(AgentModel& agent);

// ---- DQN alternate: 3x3 grid of (d_mu, d_sigma) deltas ----

inline constexpr int kDqnActionCount = 9;

struct DqnTransition {
  NoiseState s;
  int a = 0;
  double r = 0.0;
  NoiseState s_next;
};

struct DqnAgent {
  Mlp q;         // 2 -> hidden relu -> 9 linear
  Mlp q_target;
  AdamState opt;
  double epsilon = 0.9;
  double epsilon_decay = 0.98;
  double epsilon_floor = 0.05;
  double gamma = 0.99;
  double tau = 0.005;
  double delta = 0.05;
  NoiseBounds bounds;

  static DqnAgent init(const AgentConfig& config, const NoiseBounds& bounds,
                       rng::Stream& rs);
  void on_episode();
};

// action index -> (d_mu, d_sigma) with each component in {-delta, 0, +delta}
Action dqn_action_delta(int index, double delta);

// epsilon-greedy; greedy ties break toward the lowest index
int dqn_select(const DqnAgent& agent, const NoiseState& s, bool explore,
               rng::Stream& rs);

// squared error to r + gamma * max_a' Q_target(s', a'); returns pre-step loss
double dqn_update(DqnAgent& agent, const std::vector<DqnTransition>& batch);

void dqn_soft_update(DqnAgent& agent);

}  // namespace pdet
