#include "netsac/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

#include "netsac/errors.hpp"

namespace netsac {

InteractionGraph::InteractionGraph(std::size_t n, std::span<const std::pair<AgentId, AgentId>> edges)
    : neighbors_(n) {
  if (n == 0) throw ConfigError("interaction graph needs at least one agent");
  for (AgentId i = 0; i < n; ++i) neighbors_[i].push_back(i);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ConfigError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") references an agent outside [0, " + std::to_string(n) + ")");
    }
    if (u == v) continue;
    neighbors_[u].push_back(v);
    neighbors_[v].push_back(u);
  }
  for (auto& set : neighbors_) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
}

InteractionGraph InteractionGraph::from_neighbor_sets(std::vector<std::vector<AgentId>> sets) {
  const std::size_t n = sets.size();
  if (n == 0) throw ConfigError("interaction graph needs at least one agent");
  for (auto& set : sets) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
  for (AgentId i = 0; i < n; ++i) {
    if (!std::binary_search(sets[i].begin(), sets[i].end(), i)) {
      throw ConfigError("neighbor set of agent " + std::to_string(i) + " does not contain the agent");
    }
    for (AgentId j : sets[i]) {
      if (j >= n) {
        throw ConfigError("neighbor set of agent " + std::to_string(i) + " references agent " +
                          std::to_string(j) + " outside [0, " + std::to_string(n) + ")");
      }
      if (!std::binary_search(sets[j].begin(), sets[j].end(), i)) {
        throw ConfigError("neighbor sets are not symmetric: " + std::to_string(j) + " in N_" +
                          std::to_string(i) + " but " + std::to_string(i) + " not in N_" +
                          std::to_string(j));
      }
    }
  }
  InteractionGraph g;
  g.neighbors_ = std::move(sets);
  return g;
}

InteractionGraph InteractionGraph::line(std::size_t n) {
  std::vector<std::pair<AgentId, AgentId>> e;
  for (AgentId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return InteractionGraph(n, e);
}

InteractionGraph InteractionGraph::grid(std::size_t rows, std::size_t cols) {
  std::vector<std::pair<AgentId, AgentId>> e;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const AgentId id = r * cols + c;
      if (c + 1 < cols) e.emplace_back(id, id + 1);
      if (r + 1 < rows) e.emplace_back(id, id + cols);
    }
  }
  return InteractionGraph(rows * cols, e);
}

InteractionGraph InteractionGraph::complete(std::size_t n) {
  std::vector<std::pair<AgentId, AgentId>> e;
  for (AgentId i = 0; i < n; ++i)
    for (AgentId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return InteractionGraph(n, e);
}

void InteractionGraph::check_agent(AgentId i) const {
  if (i >= size()) {
    throw std::out_of_range("agent " + std::to_string(i) + " outside [0, " + std::to_string(size()) + ")");
  }
}

std::span<const AgentId> InteractionGraph::neighbors(AgentId i) const {
  check_agent(i);
  return neighbors_[i];
}

bool InteractionGraph::adjacent(AgentId i, AgentId j) const {
  check_agent(i);
  check_agent(j);
  return std::binary_search(neighbors_[i].begin(), neighbors_[i].end(), j);
}

std::vector<std::pair<AgentId, AgentId>> InteractionGraph::edges() const {
  std::vector<std::pair<AgentId, AgentId>> out;
  for (AgentId i = 0; i < size(); ++i)
    for (AgentId j : neighbors_[i])
      if (j > i) out.emplace_back(i, j);
  return out;
}

std::vector<std::size_t> InteractionGraph::distances_from(AgentId i) const {
  check_agent(i);
  const std::size_t unreachable = size();
  std::vector<std::size_t> dist(size(), unreachable);
  std::deque<AgentId> frontier{i};
  dist[i] = 0;
  while (!frontier.empty()) {
    const AgentId u = frontier.front();
    frontier.pop_front();
    for (AgentId v : neighbors_[u]) {
      if (dist[v] == unreachable) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<AgentId> InteractionGraph::kappa_neighborhood(AgentId i, std::size_t kappa) const {
  const auto dist = distances_from(i);
  std::vector<AgentId> out;
  for (AgentId j = 0; j < size(); ++j)
    if (dist[j] <= kappa) out.push_back(j);
  return out;
}

std::vector<AgentId> InteractionGraph::kappa_complement(AgentId i, std::size_t kappa) const {
  const auto dist = distances_from(i);
  std::vector<AgentId> out;
  for (AgentId j = 0; j < size(); ++j)
    if (dist[j] > kappa) out.push_back(j);
  return out;
}

bool InteractionGraph::connected() const {
  const auto dist = distances_from(0);
  return std::none_of(dist.begin(), dist.end(), [&](std::size_t d) { return d == size(); });
}

std::size_t InteractionGraph::eccentricity(AgentId i) const {
  std::size_t ecc = 0;
  for (std::size_t d : distances_from(i))
    if (d < size()) ecc = std::max(ecc, d);
  return ecc;
}

std::size_t InteractionGraph::diameter() const {
  std::size_t diam = 0;
  for (AgentId i = 0; i < size(); ++i) diam = std::max(diam, eccentricity(i));
  return diam;
}

}  // namespace netsac
