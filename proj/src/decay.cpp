#include "netsac/decay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netsac {

double percentile(std::vector<double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

double DecayProfile::percentile(std::size_t kappa, double p) const { return netsac::percentile(values.at(kappa), p); }

std::vector<double> DecayProfile::medians() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < values.size(); ++k) out.push_back(percentile(k, 50.0));
  return out;
}

DecayProfile decay_profile(const FactoredMdp& mdp, std::span<const double> q, AgentId i, std::size_t kappa_max,
                           std::size_t trials, Rng& rng) {
  const auto& layout = mdp.pair_layout();
  if (q.size() != layout.size()) throw std::invalid_argument("decay_profile: Q has the wrong length");
  const std::size_t n = mdp.agent_count();
  std::vector<std::vector<char>> inside(kappa_max + 1, std::vector<char>(n, 0));
  for (std::size_t k = 0; k <= kappa_max; ++k)
    for (AgentId j : mdp.graph().kappa_neighborhood(i, k)) inside[k][j] = 1;

  DecayProfile out;
  out.agent = i;
  out.kappa_max = kappa_max;
  out.values.assign(kappa_max + 1, {});
  std::vector<std::size_t> za(n), zb(n), mixed(n);
  for (std::size_t t = 0; t < trials; ++t) {
    layout.decode(rng.uniform_index(layout.size()), za);
    layout.decode(rng.uniform_index(layout.size()), zb);
    const std::size_t a = layout.encode(za);
    for (std::size_t k = 0; k <= kappa_max; ++k) {
      for (AgentId j = 0; j < n; ++j) mixed[j] = inside[k][j] ? za[j] : zb[j];
      out.values[k].push_back(std::abs(q[a] - q[layout.encode(mixed)]));
    }
  }
  return out;
}

DecayProfile decay_profile(const ExactOracle& oracle, AgentId i, std::size_t kappa_max, std::size_t trials,
                           Rng& rng) {
  return decay_profile(oracle.mdp(), oracle.local_q(i), i, kappa_max, trials, rng);
}

ExponentialFit fit_exponential(std::span<const double> y) {
  std::vector<double> xs, ls;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] > 0.0) {
      xs.push_back(static_cast<double>(k));
      ls.push_back(std::log(y[k]));
    }
  }
  ExponentialFit fit;
  fit.points = xs.size();
  if (xs.empty()) return fit;
  if (xs.size() == 1) {
    fit.scale = std::exp(ls[0]);
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ls[k];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ls[k] - my);
  }
  const double slope = sxy / sxx;
  fit.rate = std::exp(slope);
  fit.scale = std::exp(my - slope * mx);
  return fit;
}

}  // namespace netsac
