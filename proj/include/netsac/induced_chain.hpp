#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "netsac/factored_mdp.hpp"
#include "netsac/softmax_policy.hpp"

namespace netsac {

struct OracleLimits {
  // Largest joint state-action space |Z| the oracle will enumerate.
  std::size_t max_pairs = 10'000'000;
  // Largest |Z| * |S| stored for the state-transition factor.
  std::size_t max_kernel_entries = 200'000'000;
  // Direct (dense LU) solves up to this |Z|; iterative methods above.
  std::size_t dense_threshold = 4096;
};

// Markov chain on Z = S x A induced by a factored MDP and a localized policy:
//   P(z' | z) = P(s' | s, a) * zeta(a' | s').
// Stored in factored form: a |Z| x |S| state-transition matrix and the
// per-z policy weight zeta(a|s), so products with P cost O(|Z| |S|).
class InducedChain {
 public:
  InducedChain(const FactoredMdp& mdp, const SoftmaxPolicy& policy, OracleLimits limits = {});

  const FactoredMdp& mdp() const { return mdp_; }
  const SoftmaxPolicy& policy() const { return policy_; }
  const OracleLimits& limits() const { return limits_; }

  std::size_t size() const { return state_of_.size(); }
  std::size_t state_count() const { return state_count_; }
  bool use_dense() const { return size() <= limits_.dense_threshold; }

  Index state_of(std::size_t z) const { return state_of_[z]; }
  double policy_weight(std::size_t z) const { return weight_[z]; }
  double state_transition(std::size_t z, Index s_next) const { return kernel_[z * state_count_ + s_next]; }
  double prob(std::size_t z, std::size_t z_next) const {
    return state_transition(z, state_of_[z_next]) * weight_[z_next];
  }

  // y = P x  (expectation of x at the next pair).
  void apply(std::span<const double> x, std::span<double> y) const;
  // y = P^T x  (one-step push-forward of a distribution x).
  void apply_transpose(std::span<const double> x, std::span<double> y) const;

  Eigen::MatrixXd dense() const;

  // Strong connectivity of the support graph of P.
  bool irreducible() const;

  // r_i(z_i) as a vector over Z.
  std::vector<double> reward_vector(AgentId i) const;

 private:
  FactoredMdp mdp_;
  SoftmaxPolicy policy_;
  OracleLimits limits_;
  std::size_t state_count_ = 0;
  std::vector<Index> state_of_;
  std::vector<double> weight_;
  std::vector<double> kernel_;
};

}  // namespace netsac
