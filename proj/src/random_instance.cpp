#include "netsac/random_instance.hpp"

#include <cmath>

#include "netsac/errors.hpp"
#include "netsac/rng.hpp"

namespace netsac {

namespace {

std::vector<double> random_simplex_point(Rng& rng, std::size_t k) {
  std::vector<double> p(k);
  double total = 0.0;
  for (double& v : p) {
    // Strictly positive so every transition and action has support.
    v = 1e-12 + rng.uniform();
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

Topology parse_topology(const std::string& name) {
  if (name == "line") return Topology::Line;
  if (name == "grid") return Topology::Grid;
  throw ConfigError("unknown topology '" + name + "' (expected line or grid)");
}

std::string to_string(Topology t) { return t == Topology::Line ? "line" : "grid"; }

RandomInstance random_instance(const RandomInstanceConfig& config, std::uint64_t seed) {
  if (config.state_count == 0 || config.action_count == 0) {
    throw ConfigError("random instance needs at least one state and one action per agent");
  }
  if (!(config.coupling >= 0.0 && config.coupling <= 1.0)) {
    throw ConfigError("coupling must lie in [0, 1]");
  }
  InteractionGraph graph;
  if (config.topology == Topology::Line) {
    if (config.n == 0) throw ConfigError("random instance needs at least one agent");
    graph = InteractionGraph::line(config.n);
  } else {
    if (config.rows == 0 || config.cols == 0) throw ConfigError("grid dimensions must be positive");
    graph = InteractionGraph::grid(config.rows, config.cols);
  }
  const std::size_t n = graph.size();
  std::vector<AgentSpace> spaces(n, AgentSpace{config.state_count, config.action_count});

  Rng rng = Rng::stream(seed, "instance-gen");
  std::vector<LocalKernel> kernels;
  for (AgentId i = 0; i < n; ++i) {
    std::vector<std::size_t> radices;
    for (AgentId j : graph.neighbors(i)) radices.push_back(spaces[j].state_count);
    radices.push_back(config.action_count);
    const MixedRadix layout(radices);
    const auto base = random_simplex_point(rng, config.state_count);
    std::vector<double> table;
    table.reserve(layout.size() * config.state_count);
    for (std::size_t r = 0; r < layout.size(); ++r) {
      const auto row = random_simplex_point(rng, config.state_count);
      for (std::size_t k = 0; k < row.size(); ++k)
        table.push_back((1.0 - config.coupling) * base[k] + config.coupling * row[k]);
    }
    kernels.emplace_back(i, std::move(radices), config.state_count, std::move(table));
  }
  std::vector<LocalReward> rewards;
  for (AgentId i = 0; i < n; ++i) {
    std::vector<double> table(spaces[i].pair_count());
    for (double& v : table) v = rng.uniform();
    rewards.emplace_back(i, spaces[i], std::move(table), 1.0);
  }
  GradientTables theta(n);
  for (AgentId i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < config.state_count; ++s) {
      for (double p : random_simplex_point(rng, config.action_count)) theta[i].push_back(std::log(p));
    }
  }
  FactoredMdp mdp(std::move(graph), spaces, std::move(kernels), std::move(rewards), 1.0);
  return RandomInstance{std::move(mdp), SoftmaxPolicy(spaces, std::move(theta))};
}

}  // namespace netsac
