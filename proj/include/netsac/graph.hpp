#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace netsac {

using AgentId = std::size_t;

// Undirected interaction graph over agents 0..n-1. Each neighbor set N_i is
// stored sorted ascending and contains i itself.
class InteractionGraph {
 public:
  InteractionGraph() = default;

  // Builds from an edge list; self loops are ignored, duplicates merged.
  InteractionGraph(std::size_t n, std::span<const std::pair<AgentId, AgentId>> edges);

  // Takes explicit neighbor sets; rejects asymmetric sets or a missing i ∈ N_i.
  static InteractionGraph from_neighbor_sets(std::vector<std::vector<AgentId>> sets);

  static InteractionGraph line(std::size_t n);
  // 4-connected rows x cols lattice, agent id = r * cols + c.
  static InteractionGraph grid(std::size_t rows, std::size_t cols);
  static InteractionGraph complete(std::size_t n);

  std::size_t size() const { return neighbors_.size(); }
  std::span<const AgentId> neighbors(AgentId i) const;
  bool adjacent(AgentId i, AgentId j) const;
  std::vector<std::pair<AgentId, AgentId>> edges() const;

  // Hop distances from i; unreachable agents get size().
  std::vector<std::size_t> distances_from(AgentId i) const;

  // N_i^kappa: all agents within graph distance kappa of i, sorted.
  std::vector<AgentId> kappa_neighborhood(AgentId i, std::size_t kappa) const;
  // N_{-i}^kappa: the complement of N_i^kappa, sorted.
  std::vector<AgentId> kappa_complement(AgentId i, std::size_t kappa) const;

  bool connected() const;
  // Largest finite distance from i.
  std::size_t eccentricity(AgentId i) const;
  // Largest finite distance in the graph (equals the diameter when connected).
  std::size_t diameter() const;

 private:
  void check_agent(AgentId i) const;

  std::vector<std::vector<AgentId>> neighbors_;
};

}  // namespace netsac
