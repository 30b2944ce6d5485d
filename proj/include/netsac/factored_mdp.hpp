#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "netsac/graph.hpp"
#include "netsac/mixed_radix.hpp"
#include "netsac/rng.hpp"

namespace netsac {

using Index = std::size_t;
using JointState = std::vector<Index>;
using JointAction = std::vector<Index>;

inline constexpr double kProbabilityTolerance = 1e-12;

struct AgentSpace {
  std::size_t state_count = 1;
  std::size_t action_count = 1;

  // |Z_i|; local pair z_i = (s_i, a_i) is flattened as s_i * |A_i| + a_i.
  std::size_t pair_count() const { return state_count * action_count; }
  Index pair_index(Index s, Index a) const { return s * action_count + a; }
  Index pair_state(Index z) const { return z / action_count; }
  Index pair_action(Index z) const { return z % action_count; }
};

// P_i(s_i' | s_{N_i}, a_i). Rows are enumerated little-endian over the sorted
// neighbor states followed by the own action: row = encode(s_{j1}, ..., s_{jk}, a_i).
class LocalKernel {
 public:
  LocalKernel() = default;
  // row_radices: |S_j| for each j in N_i (sorted), then |A_i|.
  LocalKernel(AgentId agent, std::vector<std::size_t> row_radices, std::size_t next_state_count,
              std::vector<double> table);

  std::size_t row_count() const { return rows_.size(); }
  std::size_t next_state_count() const { return next_count_; }
  const MixedRadix& row_layout() const { return rows_; }
  std::span<const double> row(std::size_t r) const { return {table_.data() + r * next_count_, next_count_}; }
  std::span<const double> table() const { return table_; }

 private:
  MixedRadix rows_;
  std::size_t next_count_ = 0;
  std::vector<double> table_;
};

// r_i(s_i, a_i) in [0, r_max], flattened by pair index.
class LocalReward {
 public:
  LocalReward() = default;
  LocalReward(AgentId agent, AgentSpace space, std::vector<double> table, double r_max);

  double operator()(Index s, Index a) const { return table_[s * action_count_ + a]; }
  double at_pair(Index z) const { return table_[z]; }
  std::span<const double> table() const { return table_; }

 private:
  std::size_t action_count_ = 1;
  std::vector<double> table_;
};

// Networked MDP with factored transition P(s'|s,a) = prod_i P_i(s_i'|s_{N_i}, a_i)
// and local rewards r_i(s_i, a_i).
class FactoredMdp {
 public:
  FactoredMdp(InteractionGraph graph, std::vector<AgentSpace> spaces, std::vector<LocalKernel> kernels,
              std::vector<LocalReward> rewards, double r_max);

  std::size_t agent_count() const { return graph_.size(); }
  const InteractionGraph& graph() const { return graph_; }
  const AgentSpace& space(AgentId i) const { return spaces_.at(i); }
  std::span<const AgentSpace> spaces() const { return spaces_; }
  const LocalKernel& kernel(AgentId i) const { return kernels_.at(i); }
  const LocalReward& reward(AgentId i) const { return rewards_.at(i); }
  double r_max() const { return r_max_; }

  const MixedRadix& state_layout() const { return state_layout_; }
  const MixedRadix& action_layout() const { return action_layout_; }
  // Joint state-action z = (z_1, ..., z_n) over local pair indices.
  const MixedRadix& pair_layout() const { return pair_layout_; }

  // Kernel row index of agent i for joint state s and own action a_i.
  std::size_t kernel_row_index(AgentId i, std::span<const Index> s, Index a_i) const;
  std::span<const double> kernel_row(AgentId i, std::span<const Index> s, Index a_i) const {
    return kernels_[i].row(kernel_row_index(i, s, a_i));
  }

  void check_joint(std::span<const Index> s, std::span<const Index> a) const;

 private:
  InteractionGraph graph_;
  std::vector<AgentSpace> spaces_;
  std::vector<LocalKernel> kernels_;
  std::vector<LocalReward> rewards_;
  double r_max_;
  MixedRadix state_layout_;
  MixedRadix action_layout_;
  MixedRadix pair_layout_;
};

// prod_i P_i(s_i' | s_{N_i}, a_i).
double joint_transition_prob(const FactoredMdp& mdp, std::span<const Index> s, std::span<const Index> a,
                             std::span<const Index> s_next);

// Draws each s_i' independently from its kernel row, agents in index order.
JointState sample_step(const FactoredMdp& mdp, std::span<const Index> s, std::span<const Index> a, Rng& rng);

}  // namespace netsac
