#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "netsac/factored_mdp.hpp"

namespace netsac {

// Worst-case influence of agent j's state (or, on the diagonal, of agent i's
// own state and action) on agent i's next-state distribution, in total variation.
struct InteractionMatrix {
  std::size_t n = 0;
  std::vector<double> c;         // row-major n x n
  std::vector<double> row_sums;
  double rho_bound = 0.0;        // max_i sum_j C_ij

  double operator()(AgentId i, AgentId j) const { return c[i * n + j]; }
  bool condition_met() const { return rho_bound < 1.0; }
};

// 0.5 * ||p - q||_1.
double total_variation(std::span<const double> p, std::span<const double> q);

// Exhaustive over kernel rows; throws SizeGuardError when an agent has more
// than max_rows kernel rows.
InteractionMatrix interaction_matrix(const FactoredMdp& mdp, std::size_t max_rows = 1'000'000);

}  // namespace netsac
