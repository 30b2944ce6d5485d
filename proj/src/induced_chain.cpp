#include "netsac/induced_chain.hpp"

#include <deque>
#include <string>

#include "netsac/errors.hpp"

namespace netsac {

InducedChain::InducedChain(const FactoredMdp& mdp, const SoftmaxPolicy& policy, OracleLimits limits)
    : mdp_(mdp), policy_(policy), limits_(limits) {
  const std::size_t n = mdp_.agent_count();
  if (policy_.agent_count() != n) throw ConfigError("policy and model disagree on the agent count");
  for (AgentId i = 0; i < n; ++i) {
    if (policy_.space(i).state_count != mdp_.space(i).state_count ||
        policy_.space(i).action_count != mdp_.space(i).action_count) {
      throw ConfigError("policy table of agent " + std::to_string(i) + " does not match the model's spaces");
    }
  }
  // Overflow-safe product checks against the guards.
  const auto& pairs = mdp_.pair_layout();
  double pair_count = 1.0;
  for (std::size_t r : pairs.radices()) pair_count *= static_cast<double>(r);
  if (pair_count > static_cast<double>(limits_.max_pairs)) {
    throw SizeGuardError("joint state-action space has " + std::to_string(pair_count) +
                         " pairs, above the oracle guard of " + std::to_string(limits_.max_pairs));
  }
  state_count_ = mdp_.state_layout().size();
  const std::size_t z_count = pairs.size();
  if (static_cast<double>(z_count) * static_cast<double>(state_count_) >
      static_cast<double>(limits_.max_kernel_entries)) {
    throw SizeGuardError("state-transition factor would hold " + std::to_string(z_count) + " x " +
                         std::to_string(state_count_) + " entries, above the guard of " +
                         std::to_string(limits_.max_kernel_entries));
  }

  state_of_.resize(z_count);
  weight_.resize(z_count);
  kernel_.assign(z_count * state_count_, 0.0);

  const auto state_strides = mdp_.state_layout().strides();
  std::vector<std::vector<double>> local_policy(n);
  std::vector<Index> zs(n), s(n), a(n);
  std::vector<double> scratch(state_count_), next(state_count_);
  for (std::size_t z = 0; z < z_count; ++z) {
    pairs.decode(z, zs);
    Index joint_state = 0;
    double w = 1.0;
    for (AgentId i = 0; i < n; ++i) {
      const auto& sp = mdp_.space(i);
      s[i] = sp.pair_state(zs[i]);
      a[i] = sp.pair_action(zs[i]);
      joint_state += s[i] * state_strides[i];
    }
    for (AgentId i = 0; i < n; ++i) {
      policy_.distribution(i, s[i], std::span<double>(scratch.data(), mdp_.space(i).action_count));
      w *= scratch[a[i]];
    }
    state_of_[z] = joint_state;
    weight_[z] = w;

    // Kronecker product of the local rows, agent 0 fastest.
    double* out = kernel_.data() + z * state_count_;
    std::size_t len = 1;
    scratch[0] = 1.0;
    for (AgentId i = 0; i < n; ++i) {
      const auto row = mdp_.kernel_row(i, s, a[i]);
      for (std::size_t v = 0; v < row.size(); ++v)
        for (std::size_t k = 0; k < len; ++k) next[v * len + k] = row[v] * scratch[k];
      len *= row.size();
      std::swap(scratch, next);
    }
    std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(state_count_), out);
  }
}

void InducedChain::apply(std::span<const double> x, std::span<double> y) const {
  std::vector<double> v(state_count_, 0.0);
  for (std::size_t z = 0; z < size(); ++z) v[state_of_[z]] += weight_[z] * x[z];
  for (std::size_t z = 0; z < size(); ++z) {
    const double* row = kernel_.data() + z * state_count_;
    double acc = 0.0;
    for (std::size_t s = 0; s < state_count_; ++s) acc += row[s] * v[s];
    y[z] = acc;
  }
}

void InducedChain::apply_transpose(std::span<const double> x, std::span<double> y) const {
  std::vector<double> u(state_count_, 0.0);
  for (std::size_t z = 0; z < size(); ++z) {
    const double xz = x[z];
    if (xz == 0.0) continue;
    const double* row = kernel_.data() + z * state_count_;
    for (std::size_t s = 0; s < state_count_; ++s) u[s] += row[s] * xz;
  }
  for (std::size_t z = 0; z < size(); ++z) y[z] = weight_[z] * u[state_of_[z]];
}

Eigen::MatrixXd InducedChain::dense() const {
  const auto m = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd p(m, m);
  for (Eigen::Index z = 0; z < m; ++z)
    for (Eigen::Index zn = 0; zn < m; ++zn) p(z, zn) = prob(static_cast<std::size_t>(z), static_cast<std::size_t>(zn));
  return p;
}

bool InducedChain::irreducible() const {
  // Bipartite support graph: z -> s' (kernel > 0) and s' -> z' (weight > 0).
  // All pairs are mutually reachable iff every z is reached from z = 0 in the
  // graph and in its reverse.
  const std::size_t m = size();
  std::vector<std::vector<std::size_t>> pairs_of_state(state_count_);
  for (std::size_t z = 0; z < m; ++z)
    if (weight_[z] > 0.0) pairs_of_state[state_of_[z]].push_back(z);

  auto sweep = [&](bool forward) {
    std::vector<char> seen_pair(m, 0), seen_state(state_count_, 0);
    std::deque<std::size_t> queue{0};
    seen_pair[0] = 1;
    if (forward) {
      while (!queue.empty()) {
        const std::size_t z = queue.front();
        queue.pop_front();
        const double* row = kernel_.data() + z * state_count_;
        for (std::size_t s = 0; s < state_count_; ++s) {
          if (row[s] <= 0.0 || seen_state[s]) continue;
          seen_state[s] = 1;
          for (std::size_t zn : pairs_of_state[s])
            if (!seen_pair[zn]) {
              seen_pair[zn] = 1;
              queue.push_back(zn);
            }
        }
      }
    } else {
      // Predecessors of z' are all z with kernel(z, s(z')) > 0, provided z' has weight.
      std::vector<std::vector<std::size_t>> preds(state_count_);
      for (std::size_t z = 0; z < m; ++z) {
        const double* row = kernel_.data() + z * state_count_;
        for (std::size_t s = 0; s < state_count_; ++s)
          if (row[s] > 0.0) preds[s].push_back(z);
      }
      if (weight_[0] <= 0.0) return false;
      while (!queue.empty()) {
        const std::size_t zn = queue.front();
        queue.pop_front();
        const std::size_t s = state_of_[zn];
        if (seen_state[s]) continue;
        seen_state[s] = 1;
        for (std::size_t z : preds[s])
          if (!seen_pair[z] && weight_[z] > 0.0) {
            seen_pair[z] = 1;
            queue.push_back(z);
          }
      }
    }
    for (std::size_t z = 0; z < m; ++z)
      if (!seen_pair[z]) return false;
    return true;
  };
  return sweep(true) && sweep(false);
}

std::vector<double> InducedChain::reward_vector(AgentId i) const {
  const auto& pairs = mdp_.pair_layout();
  const auto& r = mdp_.reward(i);
  std::vector<double> out(size());
  for (std::size_t z = 0; z < size(); ++z) out[z] = r.at_pair(pairs.digit(z, i));
  return out;
}

}  // namespace netsac
