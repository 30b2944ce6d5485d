#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "netsac/factored_mdp.hpp"
#include "netsac/oracle.hpp"
#include "netsac/rng.hpp"

namespace netsac {

// Measured perturbation differences |Q_i(z) - Q_i(z')| where z' agrees with z
// on N_i^kappa, for kappa = 0..kappa_max.
struct DecayProfile {
  AgentId agent = 0;
  std::size_t kappa_max = 0;
  std::vector<std::vector<double>> values;  // [kappa][trial]

  double percentile(std::size_t kappa, double p) const;
  std::vector<double> medians() const;
};

// Each trial draws z and z' uniformly over Z once and reuses them for every
// kappa, overwriting z' on N_i^kappa with the values of z.
DecayProfile decay_profile(const FactoredMdp& mdp, std::span<const double> q, AgentId i, std::size_t kappa_max,
                           std::size_t trials, Rng& rng);
DecayProfile decay_profile(const ExactOracle& oracle, AgentId i, std::size_t kappa_max, std::size_t trials,
                           Rng& rng);

// Linear-interpolated percentile (p in [0, 100]) of an unsorted sample.
double percentile(std::vector<double> sample, double p);

struct ExponentialFit {
  double scale = 0.0;
  double rate = 0.0;
  std::size_t points = 0;  // strictly positive entries used
};

// Least-squares fit of log(y_k) = log(scale) + k log(rate) over the entries
// with y_k > 0. With fewer than two positive entries the sequence drops to 0
// after at most one step and the fitted rate is reported as 0.
ExponentialFit fit_exponential(std::span<const double> y);

}  // namespace netsac
