#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "netsac/induced_chain.hpp"
#include "netsac/neighborhood.hpp"
#include "netsac/softmax_policy.hpp"

namespace netsac {

enum class StationaryMethod { Auto, Direct, Power };

// Stationary distribution of an irreducible induced chain. Direct linear solve
// for |Z| <= dense_threshold, lazy power iteration above (or as requested).
// Throws NumericalError when the chain is not irreducible.
std::vector<double> stationary_distribution(const InducedChain& chain,
                                            StationaryMethod method = StationaryMethod::Auto);

struct AverageReward {
  double total = 0.0;               // J = (1/n) sum_i J_i
  std::vector<double> per_agent;    // J_i = E_pi r_i(z_i)
};

AverageReward average_reward(const InducedChain& chain, std::span<const double> pi);
AverageReward average_reward(const FactoredMdp& mdp, const SoftmaxPolicy& policy, OracleLimits limits = {});

enum class WeightScheme { ConditionalStationary, Uniform };

// Fixed point of the critic recursion for agent i: mu_hat and the table over
// Z_{N_i^kappa} (dummy entry included, pinned to 0).
struct CriticFixedPoint {
  double mu_hat = 0.0;
  std::size_t dummy = 0;
  std::vector<double> q_hat;
  double residual = 0.0;  // max-norm residual of the projected equation
};

struct OracleOptions {
  OracleLimits limits;
  // Agents whose local Q-functions are computed; empty means all.
  std::vector<AgentId> q_agents;
};

// Exact (brute-force) evaluation of every policy-dependent quantity on a small
// networked MDP. Everything is computed up front, so a constructed oracle is
// immutable and may be shared between threads.
class ExactOracle {
 public:
  ExactOracle(const FactoredMdp& mdp, const SoftmaxPolicy& policy, OracleOptions options = {});

  const InducedChain& chain() const { return chain_; }
  const FactoredMdp& mdp() const { return chain_.mdp(); }
  const SoftmaxPolicy& policy() const { return chain_.policy(); }
  std::span<const double> stationary() const { return pi_; }
  const AverageReward& average_reward() const { return reward_; }
  double min_stationary() const;

  // Q_i over Z, normalized to zero stationary mean.
  std::span<const double> local_q(AgentId i) const;
  // Q = (1/n) sum_j Q_j.
  std::vector<double> global_q() const;

  LocalProjection projection(AgentId i, std::size_t kappa) const;

  // Q~_i over Z_{N_i^kappa}.
  std::vector<double> truncated_q(AgentId i, std::size_t kappa,
                                  WeightScheme scheme = WeightScheme::ConditionalStationary) const;

  // E_pi[ c(z) * grad_theta_i log zeta_i(a_i|s_i) ] for every agent i, where
  // coefficient(i, z) supplies c; used by both gradient forms below.
  GradientTables score_expectation(std::span<const std::vector<double>> coefficients) const;

  GradientTables exact_policy_gradient() const;
  GradientTables approx_policy_gradient(std::size_t kappa,
                                        WeightScheme scheme = WeightScheme::ConditionalStationary) const;

  CriticFixedPoint critic_fixed_point(AgentId i, std::size_t kappa, std::size_t dummy = 0) const;
  // sqrt(E_pi |q_hat(z_N) + c_i - Q_i(z)|^2) with the minimizing constant c_i.
  double critic_fixed_point_error(AgentId i, std::size_t kappa, const CriticFixedPoint& fp) const;

  // ||P - 1 pi^T||_D with D = diag(pi).
  double mixing_norm() const;

  // Solves Q = r_i + gamma P Q.
  std::vector<double> discounted_q(AgentId i, double gamma) const;

 private:
  InducedChain chain_;
  std::vector<double> pi_;
  AverageReward reward_;
  std::vector<std::vector<double>> q_;
  std::vector<char> has_q_;
};

// Free-function forms of the oracle operations.
std::vector<double> local_q_function(const InducedChain& chain, std::span<const double> pi, AgentId i);
std::vector<double> discounted_q(const InducedChain& chain, AgentId i, double gamma);
double mixing_norm(const InducedChain& chain, std::span<const double> pi);

// Exact left-hand side of the exponential-decay inequality: the largest
// difference of q between two pairs that agree on the members of `keep`.
double perturbation_gap(const LocalProjection& keep, std::span<const double> q);

}  // namespace netsac
