#include "netsac/factored_mdp.hpp"

#include <cmath>
#include <string>

#include "netsac/errors.hpp"

namespace netsac {

LocalKernel::LocalKernel(AgentId agent, std::vector<std::size_t> row_radices, std::size_t next_state_count,
                         std::vector<double> table)
    : rows_(std::move(row_radices)), next_count_(next_state_count), table_(std::move(table)) {
  const std::string who = "kernel of agent " + std::to_string(agent);
  if (next_count_ == 0) throw ConfigError(who + ": zero next states");
  if (table_.size() != rows_.size() * next_count_) {
    throw ConfigError(who + ": expected " + std::to_string(rows_.size()) + " rows of " +
                      std::to_string(next_count_) + " entries, got " + std::to_string(table_.size()) +
                      " entries");
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    double sum = 0.0;
    for (double p : row(r)) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ConfigError(who + ", row " + std::to_string(r) + ": negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      throw ConfigError(who + ", row " + std::to_string(r) + ": sums to " + std::to_string(sum) +
                        " instead of 1");
    }
  }
}

LocalReward::LocalReward(AgentId agent, AgentSpace space, std::vector<double> table, double r_max)
    : action_count_(space.action_count), table_(std::move(table)) {
  const std::string who = "reward of agent " + std::to_string(agent);
  if (table_.size() != space.pair_count()) {
    throw ConfigError(who + ": expected " + std::to_string(space.pair_count()) + " entries, got " +
                      std::to_string(table_.size()));
  }
  for (std::size_t z = 0; z < table_.size(); ++z) {
    if (!(table_[z] >= 0.0 && table_[z] <= r_max)) {
      throw ConfigError(who + ", state " + std::to_string(space.pair_state(z)) + " action " +
                        std::to_string(space.pair_action(z)) + ": value outside [0, r_max]");
    }
  }
}

namespace {

std::vector<std::size_t> collect(std::span<const AgentSpace> spaces, std::size_t AgentSpace::*field) {
  std::vector<std::size_t> out;
  for (const auto& sp : spaces) out.push_back(sp.*field);
  return out;
}

}  // namespace

FactoredMdp::FactoredMdp(InteractionGraph graph, std::vector<AgentSpace> spaces, std::vector<LocalKernel> kernels,
                         std::vector<LocalReward> rewards, double r_max)
    : graph_(std::move(graph)),
      spaces_(std::move(spaces)),
      kernels_(std::move(kernels)),
      rewards_(std::move(rewards)),
      r_max_(r_max) {
  const std::size_t n = graph_.size();
  if (spaces_.size() != n || kernels_.size() != n || rewards_.size() != n) {
    throw ConfigError("model declares " + std::to_string(n) + " agents but provides " +
                      std::to_string(spaces_.size()) + " spaces, " + std::to_string(kernels_.size()) +
                      " kernels, " + std::to_string(rewards_.size()) + " rewards");
  }
  if (!(r_max_ >= 0.0) || !std::isfinite(r_max_)) throw ConfigError("r_max must be finite and non-negative");
  for (AgentId i = 0; i < n; ++i) {
    const auto& sp = spaces_[i];
    if (sp.state_count == 0 || sp.action_count == 0) {
      throw ConfigError("agent " + std::to_string(i) + ": state and action counts must be >= 1");
    }
    const auto nbrs = graph_.neighbors(i);
    const auto radices = kernels_[i].row_layout().radices();
    bool ok = radices.size() == nbrs.size() + 1 && radices.back() == sp.action_count &&
              kernels_[i].next_state_count() == sp.state_count;
    for (std::size_t k = 0; ok && k < nbrs.size(); ++k) ok = radices[k] == spaces_[nbrs[k]].state_count;
    if (!ok) {
      throw ConfigError("kernel of agent " + std::to_string(i) +
                        ": dimensions inconsistent with graph neighborhood and agent spaces");
    }
  }
  state_layout_ = MixedRadix(collect(spaces_, &AgentSpace::state_count));
  action_layout_ = MixedRadix(collect(spaces_, &AgentSpace::action_count));
  std::vector<std::size_t> pairs;
  for (const auto& sp : spaces_) pairs.push_back(sp.pair_count());
  pair_layout_ = MixedRadix(std::move(pairs));
}

std::size_t FactoredMdp::kernel_row_index(AgentId i, std::span<const Index> s, Index a_i) const {
  const auto nbrs = graph_.neighbors(i);
  const auto strides = kernels_[i].row_layout().strides();
  std::size_t row = 0;
  for (std::size_t k = 0; k < nbrs.size(); ++k) row += s[nbrs[k]] * strides[k];
  return row + a_i * strides[nbrs.size()];
}

void FactoredMdp::check_joint(std::span<const Index> s, std::span<const Index> a) const {
  const std::size_t n = agent_count();
  if (s.size() != n || a.size() != n) {
    throw std::invalid_argument("joint state/action must have " + std::to_string(n) + " coordinates");
  }
  for (AgentId i = 0; i < n; ++i) {
    if (s[i] >= spaces_[i].state_count || a[i] >= spaces_[i].action_count) {
      throw std::out_of_range("joint state/action coordinate of agent " + std::to_string(i) + " out of range");
    }
  }
}

double joint_transition_prob(const FactoredMdp& mdp, std::span<const Index> s, std::span<const Index> a,
                             std::span<const Index> s_next) {
  mdp.check_joint(s, a);
  mdp.check_joint(s_next, a);
  double p = 1.0;
  for (AgentId i = 0; i < mdp.agent_count(); ++i) p *= mdp.kernel_row(i, s, a[i])[s_next[i]];
  return p;
}

JointState sample_step(const FactoredMdp& mdp, std::span<const Index> s, std::span<const Index> a, Rng& rng) {
  mdp.check_joint(s, a);
  JointState next(mdp.agent_count());
  for (AgentId i = 0; i < mdp.agent_count(); ++i) next[i] = rng.categorical(mdp.kernel_row(i, s, a[i]));
  return next;
}

}  // namespace netsac
