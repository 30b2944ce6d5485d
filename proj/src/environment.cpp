#include "netsac/environment.hpp"

namespace netsac {

JointState NetworkedEnv::initial_state(Rng& rng) const {
  const auto sp = spaces();
  JointState s(sp.size());
  for (std::size_t i = 0; i < sp.size(); ++i) s[i] = rng.uniform_index(sp[i].state_count);
  return s;
}

void MdpEnvironment::step(std::span<const Index> s, std::span<const Index> a, Rng& rng, std::span<Index> next,
                          std::span<double> rewards) const {
  const std::size_t n = mdp_.agent_count();
  for (AgentId i = 0; i < n; ++i) rewards[i] = mdp_.reward(i)(s[i], a[i]);
  for (AgentId i = 0; i < n; ++i) next[i] = rng.categorical(mdp_.kernel_row(i, s, a[i]));
}

}  // namespace netsac
