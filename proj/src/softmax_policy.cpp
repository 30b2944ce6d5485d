#include "netsac/softmax_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "netsac/errors.hpp"

namespace netsac {

double norm(const GradientTables& g) {
  double sq = 0.0;
  for (const auto& table : g)
    for (double v : table) sq += v * v;
  return std::sqrt(sq);
}

SoftmaxPolicy::SoftmaxPolicy(std::span<const AgentSpace> spaces) : spaces_(spaces.begin(), spaces.end()) {
  for (const auto& sp : spaces_) theta_.emplace_back(sp.pair_count(), 0.0);
}

SoftmaxPolicy::SoftmaxPolicy(std::span<const AgentSpace> spaces, GradientTables theta)
    : spaces_(spaces.begin(), spaces.end()), theta_(std::move(theta)) {
  if (theta_.size() != spaces_.size()) {
    throw ConfigError("policy has " + std::to_string(theta_.size()) + " tables for " +
                      std::to_string(spaces_.size()) + " agents");
  }
  for (std::size_t i = 0; i < spaces_.size(); ++i) {
    if (theta_[i].size() != spaces_[i].pair_count()) {
      throw ConfigError("policy table of agent " + std::to_string(i) + " has " + std::to_string(theta_[i].size()) +
                        " entries, expected " + std::to_string(spaces_[i].pair_count()));
    }
    for (double v : theta_[i]) {
      if (!std::isfinite(v)) throw ConfigError("policy table of agent " + std::to_string(i) + " is not finite");
    }
  }
}

void SoftmaxPolicy::check(AgentId i, Index s_i) const {
  if (i >= spaces_.size() || s_i >= spaces_[i].state_count) {
    throw std::out_of_range("policy index (agent " + std::to_string(i) + ", state " + std::to_string(s_i) +
                            ") out of range");
  }
}

void SoftmaxPolicy::distribution(AgentId i, Index s_i, std::span<double> out) const {
  check(i, s_i);
  const std::size_t na = spaces_[i].action_count;
  const double* row = theta_[i].data() + s_i * na;
  const double peak = *std::max_element(row, row + na);
  double total = 0.0;
  for (std::size_t a = 0; a < na; ++a) {
    out[a] = std::exp(row[a] - peak);
    total += out[a];
  }
  for (std::size_t a = 0; a < na; ++a) out[a] /= total;
}

std::vector<double> SoftmaxPolicy::distribution(AgentId i, Index s_i) const {
  std::vector<double> out(spaces_.at(i).action_count);
  distribution(i, s_i, out);
  return out;
}

double SoftmaxPolicy::probability(AgentId i, Index s_i, Index a_i) const {
  return distribution(i, s_i).at(a_i);
}

std::vector<double> SoftmaxPolicy::grad_log(AgentId i, Index s_i, Index a_i) const {
  const auto probs = distribution(i, s_i);
  if (a_i >= probs.size()) throw std::out_of_range("action " + std::to_string(a_i) + " out of range");
  std::vector<double> g(spaces_[i].pair_count(), 0.0);
  const std::size_t na = spaces_[i].action_count;
  for (std::size_t a = 0; a < na; ++a) g[s_i * na + a] = (a == a_i ? 1.0 : 0.0) - probs[a];
  return g;
}

Index SoftmaxPolicy::sample(AgentId i, Index s_i, Rng& rng) const {
  // Small action sets; a stack buffer avoids an allocation per draw.
  double buf[64];
  const std::size_t na = spaces_.at(i).action_count;
  if (na <= 64) {
    distribution(i, s_i, std::span<double>(buf, na));
    return rng.categorical(std::span<const double>(buf, na));
  }
  const auto probs = distribution(i, s_i);
  return rng.categorical(probs);
}

JointAction SoftmaxPolicy::sample(std::span<const Index> s, Rng& rng) const {
  JointAction a(spaces_.size());
  for (AgentId i = 0; i < spaces_.size(); ++i) a[i] = sample(i, s[i], rng);
  return a;
}

void SoftmaxPolicy::ascend(AgentId i, std::span<const double> direction, double step) {
  auto& table = theta_.at(i);
  if (direction.size() != table.size()) throw std::invalid_argument("ascend: direction has wrong shape");
  for (std::size_t k = 0; k < table.size(); ++k) table[k] += step * direction[k];
}

}  // namespace netsac
