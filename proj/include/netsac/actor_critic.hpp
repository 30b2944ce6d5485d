#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "netsac/environment.hpp"
#include "netsac/neighborhood.hpp"
#include "netsac/softmax_policy.hpp"

namespace netsac {

// Q-hat_i over Z_{N_i^kappa}. The dummy entry always reads 0 and ignores
// writes. Large neighborhoods (above kDenseLimit entries) are stored sparsely,
// with unvisited entries reading 0.
class TruncatedQTable {
 public:
  static constexpr std::size_t kDenseLimit = std::size_t{1} << 22;

  TruncatedQTable(AgentId agent, std::size_t kappa, LocalProjection projection, std::size_t dummy = 0);

  AgentId agent() const { return agent_; }
  std::size_t kappa() const { return kappa_; }
  std::size_t dummy() const { return dummy_; }
  std::size_t size() const { return proj_.size(); }
  bool sparse() const { return dense_.empty() && size() > 0; }
  const LocalProjection& projection() const { return proj_; }

  double read(std::size_t u) const;
  void write(std::size_t u, double value);
  // ||Q-hat_i||_inf over the table.
  double max_abs() const;
  // Full table with the dummy entry at 0; only for tables of moderate size.
  std::vector<double> values() const;

 private:
  AgentId agent_;
  std::size_t kappa_;
  LocalProjection proj_;
  std::size_t dummy_;
  std::vector<double> dense_;
  std::unordered_map<std::size_t, double> sparse_;
  mutable double max_abs_ = 0.0;
  mutable bool max_stale_ = false;
};

struct CriticState {
  std::vector<double> mu_hat;
  std::vector<TruncatedQTable> q;

  // Zero estimates for every agent of the graph; dummy pair 0 everywhere.
  static CriticState zeros(const InteractionGraph& graph, std::span<const AgentSpace> spaces, std::size_t kappa);
};

// One critic update of agent i at local pairs `current` -> `next`; uses the
// pre-update mu_hat inside the TD target. Returns the value written (or the
// unchanged entry when `current` is the dummy pair).
double critic_step(CriticState& state, AgentId i, std::size_t current, double reward, std::size_t next,
                   double alpha);

// Gamma = 1 / (1 + max_j ||Q-hat_j||_inf).
double rescale_factor(const CriticState& state);

// Actor update of every agent at the observed pair (s, a); `local` holds each
// agent's current neighborhood index. Returns the effective step beta_t.
double actor_step(SoftmaxPolicy& policy, const CriticState& critic, std::span<const Index> s,
                  std::span<const Index> a, std::span<const std::size_t> local, double eta, bool rescale);

struct StepSchedule {
  double alpha0 = 0.5;
  double alpha_exp = 0.75;
  double eta0 = 0.5;
  double eta_exp = 0.99;

  // Throws ConfigError unless 0.5 < alpha_exp <= 1, alpha_exp < eta_exp <= 1,
  // alpha0 > 0 and eta0 >= 0.
  void validate() const;
  // min(1, alpha0 / (1 + t)^alpha_exp): the critic updates stay convex.
  double alpha(std::size_t t) const;
  double eta(std::size_t t) const;
};

struct TrainerConfig {
  std::size_t kappa = 1;
  std::size_t horizon = 200'000;
  StepSchedule schedule;
  bool rescale = false;
  std::uint64_t seed = 0;
  std::size_t cadence = 100;
  std::size_t oracle_every = 0;   // 0 disables oracle evaluation
  std::size_t window = 10'000;    // terminal reward window

  void validate() const;
};

struct OracleSample {
  double objective = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

// Exact evaluation of the current policy, e.g. backed by ExactOracle.
using OracleHook = std::function<OracleSample(const SoftmaxPolicy&)>;

struct MetricsRow {
  std::size_t step = 0;        // iterations completed
  double mean_reward = 0.0;    // (1/n) sum_i r_i(t) of the last iteration
  double mean_mu_hat = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

struct RunMetrics {
  std::vector<MetricsRow> rows;
  std::optional<OracleSample> initial;  // oracle at theta(0)
  std::optional<OracleSample> final;    // oracle at the returned policy
  double terminal_reward = 0.0;         // mean of (1/n) sum_i r_i over the last `window` steps
  double q_sup = 0.0;                   // largest |Q-hat| entry ever written
};

struct RunResult {
  SoftmaxPolicy policy;
  CriticState critic;
  RunMetrics metrics;
};

// Actor-critic loop on a single trajectory drawn from the "trajectory" stream of
// config.seed.
RunResult run_actor_critic(const NetworkedEnv& env, SoftmaxPolicy initial, const TrainerConfig& config,
                           const OracleHook& oracle = {});

}  // namespace netsac
