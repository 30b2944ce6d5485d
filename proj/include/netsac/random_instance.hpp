#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "netsac/factored_mdp.hpp"
#include "netsac/softmax_policy.hpp"

namespace netsac {

enum class Topology { Line, Grid };

Topology parse_topology(const std::string& name);
std::string to_string(Topology t);

struct RandomInstanceConfig {
  Topology topology = Topology::Line;
  std::size_t n = 3;        // agents on a line
  std::size_t rows = 2;     // grid shape when topology == Grid
  std::size_t cols = 2;
  std::size_t state_count = 2;
  std::size_t action_count = 2;
  // Weight of the input-dependent part of each kernel row: every row is
  // (1 - coupling) * b_i + coupling * u_row with b_i one random distribution per
  // agent. coupling = 1 gives fully independent random rows; smaller values
  // bound every C_ij by `coupling`.
  double coupling = 1.0;
};

struct RandomInstance {
  FactoredMdp mdp;
  SoftmaxPolicy policy;
};

// Kernel rows and policy rows are normalized uniform variates, rewards are
// uniform on [0, 1] with r_max = 1. Deterministic in the seed.
RandomInstance random_instance(const RandomInstanceConfig& config, std::uint64_t seed);

}  // namespace netsac
