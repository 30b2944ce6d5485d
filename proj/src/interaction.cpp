#include "netsac/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netsac/errors.hpp"

namespace netsac {

namespace {

// Largest TV distance between two rows of the kernel that agree on every row
// digit outside `varying`.
double sup_over_varying(const LocalKernel& kernel, std::span<const std::size_t> varying) {
  const auto& layout = kernel.row_layout();
  std::vector<std::size_t> fixed_radices;
  std::vector<std::size_t> fixed_positions;
  for (std::size_t k = 0; k < layout.rank(); ++k) {
    if (std::find(varying.begin(), varying.end(), k) == varying.end()) {
      fixed_positions.push_back(k);
      fixed_radices.push_back(layout.radices()[k]);
    }
  }
  const MixedRadix fixed_layout(fixed_radices);
  std::vector<std::vector<std::size_t>> groups(fixed_layout.size());
  for (std::size_t r = 0; r < kernel.row_count(); ++r) {
    std::size_t key = 0;
    for (std::size_t f = 0; f < fixed_positions.size(); ++f)
      key += layout.digit(r, fixed_positions[f]) * fixed_layout.strides()[f];
    groups[key].push_back(r);
  }
  double best = 0.0;
  for (const auto& g : groups)
    for (std::size_t x = 0; x < g.size(); ++x)
      for (std::size_t y = x + 1; y < g.size(); ++y)
        best = std::max(best, total_variation(kernel.row(g[x]), kernel.row(g[y])));
  return best;
}

}  // namespace

double total_variation(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) d += std::abs(p[k] - q[k]);
  return 0.5 * d;
}

InteractionMatrix interaction_matrix(const FactoredMdp& mdp, std::size_t max_rows) {
  const std::size_t n = mdp.agent_count();
  InteractionMatrix out;
  out.n = n;
  out.c.assign(n * n, 0.0);
  out.row_sums.assign(n, 0.0);
  for (AgentId i = 0; i < n; ++i) {
    const auto& kernel = mdp.kernel(i);
    if (kernel.row_count() > max_rows) {
      throw SizeGuardError("interaction matrix: agent " + std::to_string(i) + " has " +
                           std::to_string(kernel.row_count()) + " kernel rows, guard is " +
                           std::to_string(max_rows));
    }
    const auto nbrs = mdp.graph().neighbors(i);
    const std::size_t action_position = nbrs.size();
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const AgentId j = nbrs[k];
      double value;
      if (j == i) {
        const std::size_t varying[] = {k, action_position};
        value = sup_over_varying(kernel, varying);
      } else {
        const std::size_t varying[] = {k};
        value = sup_over_varying(kernel, varying);
      }
      out.c[i * n + j] = value;
      out.row_sums[i] += value;
    }
  }
  out.rho_bound = n ? *std::max_element(out.row_sums.begin(), out.row_sums.end()) : 0.0;
  return out;
}

}  // namespace netsac
