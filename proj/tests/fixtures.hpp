#pragma once

#include <vector>

#include <Eigen/Dense>

#include "netsac/factored_mdp.hpp"
#include "netsac/random_instance.hpp"
#include "netsac/softmax_policy.hpp"

namespace netsac::testing {

// One agent, one action, transition matrix `rows`, reward per state.
inline FactoredMdp single_agent_chain(const std::vector<std::vector<double>>& rows, const std::vector<double>& reward,
                                      double r_max = 1.0) {
  const std::size_t k = rows.size();
  std::vector<double> table;
  for (const auto& r : rows) table.insert(table.end(), r.begin(), r.end());
  std::vector<LocalKernel> kernels{LocalKernel(0, {k, 1}, k, table)};
  std::vector<LocalReward> rewards{LocalReward(0, AgentSpace{k, 1}, reward, r_max)};
  return FactoredMdp(InteractionGraph(1, {}), {AgentSpace{k, 1}}, std::move(kernels), std::move(rewards), r_max);
}

inline FactoredMdp with_rewards(const FactoredMdp& mdp, double value) {
  std::vector<LocalKernel> kernels;
  std::vector<LocalReward> rewards;
  for (AgentId i = 0; i < mdp.agent_count(); ++i) {
    kernels.push_back(mdp.kernel(i));
    rewards.emplace_back(i, mdp.space(i), std::vector<double>(mdp.space(i).pair_count(), value), mdp.r_max());
  }
  std::vector<AgentSpace> spaces(mdp.spaces().begin(), mdp.spaces().end());
  return FactoredMdp(mdp.graph(), spaces, std::move(kernels), std::move(rewards), mdp.r_max());
}

inline RandomInstance line_instance(std::uint64_t seed, std::size_t n = 3, double coupling = 1.0,
                                    std::size_t states = 2, std::size_t actions = 2) {
  RandomInstanceConfig cfg;
  cfg.n = n;
  cfg.coupling = coupling;
  cfg.state_count = states;
  cfg.action_count = actions;
  return random_instance(cfg, seed);
}

// P(z'|z) enumerated directly from the joint transition probability and the
// policy, without the factored chain.
inline Eigen::MatrixXd brute_force_transition(const FactoredMdp& mdp, const SoftmaxPolicy& policy) {
  const auto& layout = mdp.pair_layout();
  const std::size_t n = mdp.agent_count();
  const auto m = static_cast<Eigen::Index>(layout.size());
  Eigen::MatrixXd p(m, m);
  std::vector<Index> zp, zq, s(n), a(n), sn(n), an(n);
  for (Eigen::Index z = 0; z < m; ++z) {
    zp = layout.decode(static_cast<std::size_t>(z));
    for (AgentId i = 0; i < n; ++i) {
      s[i] = mdp.space(i).pair_state(zp[i]);
      a[i] = mdp.space(i).pair_action(zp[i]);
    }
    for (Eigen::Index w = 0; w < m; ++w) {
      zq = layout.decode(static_cast<std::size_t>(w));
      double pol = 1.0;
      for (AgentId i = 0; i < n; ++i) {
        sn[i] = mdp.space(i).pair_state(zq[i]);
        an[i] = mdp.space(i).pair_action(zq[i]);
        pol *= policy.probability(i, sn[i], an[i]);
      }
      p(z, w) = joint_transition_prob(mdp, s, a, sn) * pol;
    }
  }
  return p;
}

// r_i(z_i) over Z.
inline Eigen::VectorXd reward_over_pairs(const FactoredMdp& mdp, AgentId i) {
  const auto& layout = mdp.pair_layout();
  Eigen::VectorXd r(static_cast<Eigen::Index>(layout.size()));
  for (std::size_t z = 0; z < layout.size(); ++z) r(static_cast<Eigen::Index>(z)) = mdp.reward(i).at_pair(layout.digit(z, i));
  return r;
}

}  // namespace netsac::testing
