#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "netsac/factored_mdp.hpp"
#include "netsac/rng.hpp"

namespace netsac {

// Grad-log norm bound of the tabular softmax: ||e_a - zeta|| <= sqrt(2).
inline constexpr double kSoftmaxScoreBound = 1.4142135623730951;

// Per-agent parameter tables, one table of |S_i| x |A_i| entries, flattened by
// pair index s * |A_i| + a.
using GradientTables = std::vector<std::vector<double>>;

double norm(const GradientTables& g);

// Tabular localized softmax policy: zeta_i(a | s_i) ∝ exp(theta_i[s_i, a]).
class SoftmaxPolicy {
 public:
  SoftmaxPolicy() = default;
  // theta = 0, i.e. uniform local policies.
  explicit SoftmaxPolicy(std::span<const AgentSpace> spaces);
  SoftmaxPolicy(std::span<const AgentSpace> spaces, GradientTables theta);

  std::size_t agent_count() const { return spaces_.size(); }
  const AgentSpace& space(AgentId i) const { return spaces_.at(i); }

  std::span<const double> theta(AgentId i) const { return theta_.at(i); }
  std::span<double> theta(AgentId i) { return theta_.at(i); }
  const GradientTables& parameters() const { return theta_; }

  // Softmax over a of theta_i[s_i, a].
  std::vector<double> distribution(AgentId i, Index s_i) const;
  void distribution(AgentId i, Index s_i, std::span<double> out) const;
  double probability(AgentId i, Index s_i, Index a_i) const;

  // Gradient of log zeta_i(a_i | s_i) w.r.t. theta_i; nonzero only on row s_i,
  // where entry a equals 1{a = a_i} - zeta_i(a | s_i).
  std::vector<double> grad_log(AgentId i, Index s_i, Index a_i) const;

  Index sample(AgentId i, Index s_i, Rng& rng) const;
  JointAction sample(std::span<const Index> s, Rng& rng) const;

  // theta_i += step * direction (direction shaped like theta_i).
  void ascend(AgentId i, std::span<const double> direction, double step);

 private:
  void check(AgentId i, Index s_i) const;

  std::vector<AgentSpace> spaces_;
  GradientTables theta_;
};

}  // namespace netsac
