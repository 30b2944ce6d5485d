#pragma once

#include <memory>
#include <span>
#include <vector>

#include "netsac/factored_mdp.hpp"
#include "netsac/graph.hpp"
#include "netsac/rng.hpp"

namespace netsac {

// A networked environment as seen by a trainer: per-agent finite state and
// action spaces on an interaction graph, sampled transitions, local rewards.
class NetworkedEnv {
 public:
  virtual ~NetworkedEnv() = default;

  virtual const InteractionGraph& graph() const = 0;
  virtual std::span<const AgentSpace> spaces() const = 0;
  // Upper bound on every local reward.
  virtual double reward_bound() const = 0;

  std::size_t agent_count() const { return graph().size(); }

  // Uniform over the joint state space.
  JointState initial_state(Rng& rng) const;

  // Rewards earned at (s, a) and a sample of the next joint state.
  virtual void step(std::span<const Index> s, std::span<const Index> a, Rng& rng, std::span<Index> next,
                    std::span<double> rewards) const = 0;

  virtual std::unique_ptr<NetworkedEnv> clone() const = 0;
};

// Simulator over an explicit factored MDP.
class MdpEnvironment final : public NetworkedEnv {
 public:
  explicit MdpEnvironment(FactoredMdp mdp) : mdp_(std::move(mdp)) {}

  const FactoredMdp& mdp() const { return mdp_; }
  const InteractionGraph& graph() const override { return mdp_.graph(); }
  std::span<const AgentSpace> spaces() const override { return mdp_.spaces(); }
  double reward_bound() const override { return mdp_.r_max(); }

  void step(std::span<const Index> s, std::span<const Index> a, Rng& rng, std::span<Index> next,
            std::span<double> rewards) const override;

  std::unique_ptr<NetworkedEnv> clone() const override { return std::make_unique<MdpEnvironment>(*this); }

 private:
  FactoredMdp mdp_;
};

}  // namespace netsac
