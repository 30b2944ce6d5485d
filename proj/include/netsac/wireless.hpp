#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "netsac/environment.hpp"

namespace netsac {

struct WirelessConfig {
  std::size_t rows = 3;  // users per column
  std::size_t cols = 3;  // users per row
  std::size_t deadline = 2;
  // Per-user arrival and per-AP success probabilities; empty means drawn
  // uniformly from [0, 1] under `seed`.
  std::vector<double> arrival;
  std::vector<double> success;
  std::uint64_t seed = 0;
};

// Users on a rows x cols grid of cells with access points on the cell corners,
// AP id = r * (cols + 1) + c for corner (r, c). User i's local state is the
// bit tuple (e_1, ..., e_d) encoded as sum_m e_m 2^(m-1); action 0 is null and
// action k >= 1 sends the most urgent packet to the k-th AP of the user's
// sorted AP list.
class WirelessEnv final : public NetworkedEnv {
 public:
  explicit WirelessEnv(const WirelessConfig& config);

  const InteractionGraph& graph() const override { return graph_; }
  std::span<const AgentSpace> spaces() const override { return spaces_; }
  double reward_bound() const override { return 1.0; }

  std::size_t user_count() const { return aps_.size(); }
  std::size_t ap_count() const { return success_.size(); }
  std::size_t deadline() const { return deadline_; }
  std::span<const std::size_t> access_points(AgentId i) const { return aps_.at(i); }
  std::size_t sharers(std::size_t ap) const { return sharers_.at(ap); }
  std::span<const double> arrival() const { return arrival_; }
  std::span<const double> success() const { return success_; }

  // Action after coercion of empty queues to null.
  Index effective_action(Index state, Index action) const { return state == 0 ? 0 : action; }
  // AP targeted by a non-null action.
  std::size_t target(AgentId i, Index action) const { return aps_[i][action - 1]; }

  // Draws one success variate per AP and then one arrival variate per user on
  // every call, so each user's outcome depends only on its conflict neighbors.
  void step(std::span<const Index> s, std::span<const Index> a, Rng& rng, std::span<Index> next,
            std::span<double> rewards) const override;

  // Exact distribution of user i's next local state and the probability that
  // user i earns reward 1, given the joint state and action.
  struct LocalOutcome {
    std::vector<double> next_state;
    double reward_probability = 0.0;
  };
  LocalOutcome local_transition(AgentId i, std::span<const Index> s, std::span<const Index> a) const;

  std::unique_ptr<NetworkedEnv> clone() const override { return std::make_unique<WirelessEnv>(*this); }

 private:
  std::size_t deadline_;
  std::vector<std::vector<std::size_t>> aps_;
  std::vector<std::size_t> sharers_;
  std::vector<double> arrival_;
  std::vector<double> success_;
  InteractionGraph graph_;
  std::vector<AgentSpace> spaces_;
  mutable std::vector<std::size_t> senders_;  // scratch for step()
  mutable std::vector<double> draws_;
};

// Localized ALOHA: with probability p_send send to an AP chosen with
// probability proportional to q_k / sharers(k) (uniform if all q_k vanish),
// otherwise stay silent.
class AlohaPolicy {
 public:
  AlohaPolicy(const WirelessEnv& env, double p_send);

  double p_send() const { return p_send_; }
  std::span<const double> distribution(AgentId i) const { return probs_.at(i); }
  Index sample(AgentId i, Rng& rng) const { return rng.categorical(probs_[i]); }

 private:
  double p_send_;
  std::vector<std::vector<double>> probs_;
};

}  // namespace netsac
