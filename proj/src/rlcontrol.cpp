#include "pdet/rlcontrol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdet/kernels.hpp"

namespace pdet {

double reward(double loss, double epsilon, double r_max) {
  if (!std::isfinite(loss)) throw std::invalid_argument("reward: loss not finite");
  const double gap = loss - epsilon;
  const double r = gap > 0.0 ? -std::log(gap) : std::exp(-gap);
  return std::min(r, r_max);
}

std::array<double, 2> normalize_state(const NoiseState& s) {
  const NoiseBounds& b = s.bounds;
  const auto norm = [](double x, double lo, double hi) {
    return hi > lo ? 2.0 * (x - lo) / (hi - lo) - 1.0 : 0.0;
  };
  return {norm(s.mu, b.mu_lo, b.mu_hi), norm(s.sigma, b.sigma_lo, b.sigma_hi)};
}

AgentModel AgentModel::init(const AgentConfig& config,
                            const NoiseBounds& bounds, rng::Stream& rs) {
  bounds.validate();
  if (config.tau <= 0.0 || config.tau > 1.0)
    throw std::invalid_argument("tau must be in (0,1]");
  if (config.gamma < 0.0 || config.gamma >= 1.0)
    throw std::invalid_argument("gamma must be in [0,1)");

  AgentModel agent;
  agent.config = config;
  agent.bounds = bounds;
  agent.explore_std_now = config.explore_std;
  const std::size_t h = config.hidden;
  agent.actor = Mlp::init(2,
                          {{h, Activation::relu},
                           {h, Activation::relu},
                           {2, Activation::tanh}},
                          rs);
  agent.critic = Mlp::init(4,
                           {{h, Activation::relu},
                            {h, Activation::relu},
                            {1, Activation::linear}},
                           rs);
  agent.actor_target = agent.actor;
  agent.critic_target = agent.critic;
  agent.actor_opt = AdamState::init(agent.actor, config.lr, config.lr_decay);
  agent.critic_opt = AdamState::init(agent.critic, config.lr, config.lr_decay);
  return agent;
}

void AgentModel::on_episode(int episode) {
  actor_opt.epoch = episode;
  critic_opt.epoch = episode;
  explore_std_now =
      config.explore_std * std::pow(config.explore_decay, episode);
}

namespace {

// critic input: normalized state then normalized action
std::vector<double> critic_input(const NoiseState& s, const Action& a,
                                 double action_bound) {
  const std::array<double, 2> sn = normalize_state(s);
  return {sn[0], sn[1], a[0] / action_bound, a[1] / action_bound};
}

Action actor_action(const Mlp& actor, const NoiseState& s,
                    double action_bound) {
  const std::array<double, 2> sn = normalize_state(s);
  const std::vector<double> out = forward_value(actor, sn);
  return {out[0] * action_bound, out[1] * action_bound};
}

}  // namespace

Action select_action(const AgentModel& agent, const NoiseState& s,
                     bool explore, rng::Stream& rs) {
  Action a = actor_action(agent.actor, s, agent.config.action_bound);
  if (explore) {
    a[0] += agent.explore_std_now * rs.gaussian();
    a[1] += agent.explore_std_now * rs.gaussian();
  }
  const double bound = agent.config.action_bound;
  a[0] = std::clamp(a[0], -bound, bound);
  a[1] = std::clamp(a[1], -bound, bound);
  return a;
}

NoiseState apply_action(const NoiseState& s, const Action& a) {
  NoiseState next = s;
  next.mu = std::clamp(s.mu + a[0], s.bounds.mu_lo, s.bounds.mu_hi);
  next.sigma = std::clamp(s.sigma + a[1], s.bounds.sigma_lo, s.bounds.sigma_hi);
  return next;
}

std::vector<double> bellman_target(const std::vector<Transition>& batch,
                                   const AgentModel& agent) {
  if (batch.empty()) throw std::invalid_argument("bellman_target: empty batch");
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition& t : batch) {
    const Action a_next =
        actor_action(agent.actor_target, t.s_next, agent.config.action_bound);
    const std::vector<double> q = forward_value(
        agent.critic_target,
        critic_input(t.s_next, a_next, agent.config.action_bound));
    targets.push_back(t.r + agent.config.gamma * q[0]);
  }
  return targets;
}

double critic_update(AgentModel& agent, const std::vector<Transition>& batch) {
  const std::vector<double> targets = bellman_target(batch, agent);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  MlpGrads grads = MlpGrads::zeros_like(agent.critic);
  double loss = 0.0;
  std::vector<double> unused;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ForwardCache cache = forward(
        agent.critic,
        critic_input(batch[i].s, batch[i].a, agent.config.action_bound));
    const double err = cache.output[0] - targets[i];
    loss += err * err * inv_n;
    const std::vector<double> gout = {2.0 * err * inv_n};
    grads.accumulate(backward(agent.critic, cache, gout, unused));
  }
  if (!std::isfinite(loss))
    throw std::runtime_error("critic_update: non-finite loss");
  adam_step(agent.critic, grads, agent.critic_opt);
  return loss;
}

double actor_update(AgentModel& agent, const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("actor_update: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  MlpGrads grads = MlpGrads::zeros_like(agent.actor);
  double mean_q = 0.0;
  for (const Transition& t : batch) {
    const std::array<double, 2> sn = normalize_state(t.s);
    const ForwardCache actor_cache = forward(agent.actor, sn);
    // critic consumes the normalized action = raw tanh output of the actor
    const std::vector<double> qin = {sn[0], sn[1], actor_cache.output[0],
                                     actor_cache.output[1]};
    const ForwardCache critic_cache = forward(agent.critic, qin);
    mean_q += critic_cache.output[0] * inv_n;

    // ascend Q: output grad -1/n through the frozen critic, take the action
    // slice of the critic's input gradient, push through the actor
    std::vector<double> critic_in_grad;
    const std::vector<double> gout = {-inv_n};
    backward(agent.critic, critic_cache, gout, critic_in_grad);
    const std::vector<double> ga = {critic_in_grad[2], critic_in_grad[3]};
    std::vector<double> unused;
    grads.accumulate(backward(agent.actor, actor_cache, ga, unused));
  }
  if (!std::isfinite(mean_q))
    throw std::runtime_error("actor_update: non-finite objective");
  adam_step(agent.actor, grads, agent.actor_opt);
  return mean_q;
}

void soft_update_targets(AgentModel& agent) {
  soft_update(agent.actor, agent.actor_target, agent.config.tau);
  soft_update(agent.critic, agent.critic_target, agent.config.tau);
}

DqnAgent DqnAgent::init(const AgentConfig& config, const NoiseBounds& bounds,
                        rng::Stream& rs) {
  bounds.validate();
  DqnAgent agent;
  agent.bounds = bounds;
  agent.gamma = config.gamma;
  agent.tau = config.tau;
  agent.delta = config.action_bound;
  agent.q = Mlp::init(2,
                      {{config.hidden, Activation::relu},
                       {static_cast<std::size_t>(kDqnActionCount),
                        Activation::linear}},
                      rs);
  agent.q_target = agent.q;
  agent.opt = AdamState::init(agent.q, config.lr, config.lr_decay);
  return agent;
}

void DqnAgent::on_episode() {
  epsilon = std::max(epsilon_floor, epsilon * epsilon_decay);
}

Action dqn_action_delta(int index, double delta) {
  if (index < 0 || index >= kDqnActionCount)
    throw std::invalid_argument("dqn action index out of range");
  static constexpr double kSteps[3] = {-1.0, 0.0, 1.0};
  return {kSteps[index / 3] * delta, kSteps[index % 3] * delta};
}

int dqn_select(const DqnAgent& agent, const NoiseState& s, bool explore,
               rng::Stream& rs) {
  if (explore && rs.uniform01() < agent.epsilon)
    return static_cast<int>(rs.below(kDqnActionCount));
  const std::vector<double> q = forward_value(agent.q, normalize_state(s));
  int best = 0;
  for (int i = 1; i < kDqnActionCount; ++i)
    if (q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(best)])
      best = i;
  return best;
}

double dqn_update(DqnAgent& agent, const std::vector<DqnTransition>& batch) {
  if (batch.empty()) throw std::invalid_argument("dqn_update: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  MlpGrads grads = MlpGrads::zeros_like(agent.q);
  double loss = 0.0;
  std::vector<double> unused;
  for (const DqnTransition& t : batch) {
    const std::vector<double> q_next =
        forward_value(agent.q_target, normalize_state(t.s_next));
    const double best_next = *std::max_element(q_next.begin(), q_next.end());
    const double target = t.r + agent.gamma * best_next;

    const ForwardCache cache = forward(agent.q, normalize_state(t.s));
    const double err = cache.output[static_cast<std::size_t>(t.a)] - target;
    loss += err * err * inv_n;
    std::vector<double> gout(kDqnActionCount, 0.0);
    gout[static_cast<std::size_t>(t.a)] = 2.0 * err * inv_n;
    grads.accumulate(backward(agent.q, cache, gout, unused));
  }
  if (!std::isfinite(loss))
    throw std::runtime_error("dqn_update: non-finite loss");
  adam_step(agent.q, grads, agent.opt);
  return loss;
}

void dqn_soft_update(DqnAgent& agent) {
  soft_update(agent.q, agent.q_target, agent.tau);
}

}  // namespace pdet
