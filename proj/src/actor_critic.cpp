#include "netsac/actor_critic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netsac/errors.hpp"

namespace netsac {

TruncatedQTable::TruncatedQTable(AgentId agent, std::size_t kappa, LocalProjection projection, std::size_t dummy)
    : agent_(agent), kappa_(kappa), proj_(std::move(projection)), dummy_(dummy) {
  if (dummy_ >= proj_.size()) throw std::out_of_range("dummy pair outside the neighborhood table");
  if (proj_.size() <= kDenseLimit) dense_.assign(proj_.size(), 0.0);
}

double TruncatedQTable::read(std::size_t u) const {
  if (u == dummy_) return 0.0;
  if (!dense_.empty()) return dense_[u];
  const auto it = sparse_.find(u);
  return it == sparse_.end() ? 0.0 : it->second;
}

void TruncatedQTable::write(std::size_t u, double value) {
  if (u == dummy_) return;
  double* slot;
  if (!dense_.empty()) {
    slot = &dense_[u];
  } else {
    slot = &sparse_[u];
  }
  const double old = std::abs(*slot);
  *slot = value;
  if (std::abs(value) >= max_abs_) {
    max_abs_ = std::abs(value);
    max_stale_ = false;
  } else if (old >= max_abs_) {
    max_stale_ = true;
  }
}

double TruncatedQTable::max_abs() const {
  if (max_stale_) {
    double m = 0.0;
    if (!dense_.empty()) {
      for (double v : dense_) m = std::max(m, std::abs(v));
    } else {
      for (const auto& [u, v] : sparse_) m = std::max(m, std::abs(v));
    }
    max_abs_ = m;
    max_stale_ = false;
  }
  return max_abs_;
}

std::vector<double> TruncatedQTable::values() const {
  std::vector<double> out(size(), 0.0);
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = read(u);
  return out;
}

CriticState CriticState::zeros(const InteractionGraph& graph, std::span<const AgentSpace> spaces, std::size_t kappa) {
  CriticState state;
  state.mu_hat.assign(graph.size(), 0.0);
  for (AgentId i = 0; i < graph.size(); ++i) {
    state.q.emplace_back(i, kappa, LocalProjection(spaces, graph.kappa_neighborhood(i, kappa)));
  }
  return state;
}

double critic_step(CriticState& state, AgentId i, std::size_t current, double reward, std::size_t next,
                   double alpha) {
  const double mu_old = state.mu_hat[i];
  state.mu_hat[i] = (1.0 - alpha) * mu_old + alpha * reward;
  auto& table = state.q[i];
  if (current == table.dummy()) return 0.0;
  const double value = (1.0 - alpha) * table.read(current) + alpha * (reward - mu_old + table.read(next));
  table.write(current, value);
  return value;
}

double rescale_factor(const CriticState& state) {
  double m = 0.0;
  for (const auto& t : state.q) m = std::max(m, t.max_abs());
  return 1.0 / (1.0 + m);
}

double actor_step(SoftmaxPolicy& policy, const CriticState& critic, std::span<const Index> s,
                  std::span<const Index> a, std::span<const std::size_t> local, double eta, bool rescale) {
  const std::size_t n = policy.agent_count();
  const double beta = rescale ? eta * rescale_factor(critic) : eta;
  if (beta == 0.0) return beta;
  std::vector<double> coef(n, 0.0);
  for (AgentId i = 0; i < n; ++i) {
    double sum = 0.0;
    for (AgentId j : critic.q[i].projection().members()) sum += critic.q[j].read(local[j]);
    coef[i] = sum / static_cast<double>(n);
  }
  std::vector<double> probs;
  for (AgentId i = 0; i < n; ++i) {
    if (coef[i] == 0.0) continue;
    const auto& sp = policy.space(i);
    probs.resize(sp.action_count);
    policy.distribution(i, s[i], probs);
    auto theta = policy.theta(i);
    for (Index b = 0; b < sp.action_count; ++b) {
      const double g = (b == a[i] ? 1.0 : 0.0) - probs[b];
      theta[sp.pair_index(s[i], b)] += beta * coef[i] * g;
    }
  }
  return beta;
}

void StepSchedule::validate() const {
  if (!(alpha_exp > 0.5 && alpha_exp <= 1.0)) throw ConfigError("alpha exponent must lie in (0.5, 1]");
  if (!(eta_exp > alpha_exp && eta_exp <= 1.0)) {
    throw ConfigError("eta exponent must exceed the alpha exponent and be at most 1");
  }
  if (!(alpha0 > 0.0)) throw ConfigError("alpha0 must be positive");
  if (!(eta0 >= 0.0)) throw ConfigError("eta0 must be nonnegative");
}

double StepSchedule::alpha(std::size_t t) const {
  return std::min(1.0, alpha0 / std::pow(1.0 + static_cast<double>(t), alpha_exp));
}

double StepSchedule::eta(std::size_t t) const { return eta0 / std::pow(1.0 + static_cast<double>(t), eta_exp); }

void TrainerConfig::validate() const {
  schedule.validate();
  if (horizon == 0) throw ConfigError("horizon must be at least 1");
  if (cadence == 0) throw ConfigError("metrics cadence must be at least 1");
}

RunResult run_actor_critic(const NetworkedEnv& env, SoftmaxPolicy initial, const TrainerConfig& config,
                           const OracleHook& oracle) {
  config.validate();
  const std::size_t n = env.agent_count();
  const auto spaces = env.spaces();
  if (initial.agent_count() != n) throw ConfigError("initial policy has the wrong number of agents");
  for (AgentId i = 0; i < n; ++i) {
    if (initial.space(i).state_count != spaces[i].state_count ||
        initial.space(i).action_count != spaces[i].action_count) {
      throw ConfigError("initial policy does not match the spaces of agent " + std::to_string(i));
    }
  }

  RunResult result{std::move(initial), CriticState::zeros(env.graph(), spaces, config.kappa), {}};
  auto& policy = result.policy;
  auto& critic = result.critic;
  auto& metrics = result.metrics;
  if (oracle) metrics.initial = oracle(policy);

  Rng rng = Rng::stream(config.seed, "trajectory");
  JointState s = env.initial_state(rng);
  JointAction a = policy.sample(s, rng);
  JointState s_next(n);
  JointAction a_next(n);
  std::vector<double> rewards(n);
  std::vector<Index> pairs(n), pairs_next(n);
  std::vector<std::size_t> local(n), local_next(n);
  for (AgentId i = 0; i < n; ++i) pairs[i] = spaces[i].pair_index(s[i], a[i]);
  for (AgentId i = 0; i < n; ++i) local[i] = critic.q[i].projection().project_pairs(pairs);

  const std::size_t window_start = config.horizon > config.window ? config.horizon - config.window : 0;
  double window_sum = 0.0;
  for (std::size_t t = 0; t < config.horizon; ++t) {
    env.step(s, a, rng, s_next, rewards);
    for (AgentId i = 0; i < n; ++i) a_next[i] = policy.sample(i, s_next[i], rng);
    for (AgentId i = 0; i < n; ++i) pairs_next[i] = spaces[i].pair_index(s_next[i], a_next[i]);
    for (AgentId i = 0; i < n; ++i) local_next[i] = critic.q[i].projection().project_pairs(pairs_next);

    // The actor reads Q-hat^t and theta(t) only, and the critic update does not
    // depend on theta(t+1), so running the actor first is the same iteration.
    actor_step(policy, critic, s, a, local, config.schedule.eta(t), config.rescale);
    const double alpha = config.schedule.alpha(t);
    for (AgentId i = 0; i < n; ++i) {
      const double v = critic_step(critic, i, local[i], rewards[i], local_next[i], alpha);
      metrics.q_sup = std::max(metrics.q_sup, std::abs(v));
    }

    double mean_reward = 0.0;
    for (double r : rewards) mean_reward += r;
    mean_reward /= static_cast<double>(n);
    if (t >= window_start) window_sum += mean_reward;

    const std::size_t done = t + 1;
    if (done % config.cadence == 0 || done == config.horizon) {
      MetricsRow row;
      row.step = done;
      row.mean_reward = mean_reward;
      for (double mu : critic.mu_hat) row.mean_mu_hat += mu;
      row.mean_mu_hat /= static_cast<double>(n);
      if (oracle && config.oracle_every > 0 && (done % config.oracle_every == 0 || done == config.horizon)) {
        const auto sample = oracle(policy);
        row.objective = sample.objective;
        row.grad_norm = sample.grad_norm;
      }
      metrics.rows.push_back(row);
    }

    s.swap(s_next);
    a.swap(a_next);
    local.swap(local_next);
  }
  metrics.terminal_reward = window_sum / static_cast<double>(config.horizon - window_start);
  if (oracle) metrics.final = oracle(policy);
  return result;
}

}  // namespace netsac
