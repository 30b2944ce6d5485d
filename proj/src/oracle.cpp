#include "netsac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "netsac/errors.hpp"
#include "netsac/rng.hpp"

namespace netsac {

namespace {

constexpr std::size_t kMaxIterations = 200'000;

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Eigen::Map<const Eigen::VectorXd> view(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void require_irreducible(const InducedChain& chain) {
  if (!chain.irreducible()) {
    throw NumericalError(
        "induced chain is not ergodic: its support graph is not strongly connected "
        "(several closed classes or transient pairs)");
  }
}

std::vector<double> stationary_direct(const Eigen::MatrixXd& p) {
  const Eigen::Index m = p.rows();
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(m, m);
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(b);
  x += lu.solve(b - a * x);  // one refinement step
  return to_vector(x);
}

std::vector<double> stationary_power(const InducedChain& chain) {
  const std::size_t m = chain.size();
  std::vector<double> x(m, 1.0 / static_cast<double>(m)), y(m);
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    chain.apply_transpose(x, y);
    const double residual = l1_distance(x, y);
    if (residual <= 1e-13) return y;
    // Lazy step (I + P^T)/2 converges for periodic chains as well.
    double total = 0.0;
    for (std::size_t z = 0; z < m; ++z) {
      x[z] = 0.5 * (x[z] + y[z]);
      total += x[z];
    }
    for (double& v : x) v /= total;
  }
  throw NumericalError("power iteration for the stationary distribution did not converge");
}

void finish_distribution(const InducedChain& chain, std::vector<double>& pi) {
  double total = 0.0;
  for (double& v : pi) {
    if (v < -1e-12) throw NumericalError("stationary solve produced a negative probability");
    v = std::max(v, 0.0);
    total += v;
  }
  for (double& v : pi) v /= total;
  std::vector<double> y(pi.size());
  chain.apply_transpose(pi, y);
  const double residual = l1_distance(pi, y);
  if (!(residual <= 1e-11)) {
    throw NumericalError("stationary distribution residual " + std::to_string(residual) + " too large");
  }
  if (*std::min_element(pi.begin(), pi.end()) <= 0.0) {
    throw NumericalError("stationary distribution has a zero entry; chain is not ergodic");
  }
}

std::vector<double> centered_reward(const InducedChain& chain, std::span<const double> pi, AgentId i) {
  auto d = chain.reward_vector(i);
  const double j = dot(pi, d);
  for (double& v : d) v -= j;
  return d;
}

void check_poisson_residual(const InducedChain& chain, std::span<const double> q, std::span<const double> d,
                            AgentId i) {
  std::vector<double> pq(q.size());
  chain.apply(q, pq);
  double res = 0.0;
  for (std::size_t z = 0; z < q.size(); ++z) res = std::max(res, std::abs(q[z] - d[z] - pq[z]));
  if (!(res <= 1e-10)) {
    throw NumericalError("Poisson equation for agent " + std::to_string(i) + " has residual " +
                         std::to_string(res));
  }
}

std::vector<double> poisson_iterative(const InducedChain& chain, std::span<const double> pi,
                                      std::vector<double> d) {
  // Q = (1/2) sum_t P_L^t d with the lazy kernel P_L = (I + P)/2.
  const std::size_t m = chain.size();
  std::vector<double> term(d.begin(), d.end()), next(m), q(m, 0.0);
  const double scale = std::max(1.0, max_abs(d));
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    // Deflate the stationary mean so rounding in J_i does not accumulate.
    const double drift = dot(pi, term);
    for (double& v : term) v -= drift;
    for (std::size_t z = 0; z < m; ++z) q[z] += 0.5 * term[z];
    if (max_abs(term) <= 1e-14 * scale) {
      const double mean = dot(pi, q);
      for (double& v : q) v -= mean;
      return q;
    }
    chain.apply(term, next);
    for (std::size_t z = 0; z < m; ++z) term[z] = 0.5 * (term[z] + next[z]);
  }
  throw NumericalError("Poisson series did not converge");
}

std::vector<double> discounted_dense(const Eigen::MatrixXd& p, std::span<const double> r, double gamma) {
  const Eigen::Index m = p.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - gamma * p;
  return to_vector(a.partialPivLu().solve(view(r)));
}

std::vector<double> discounted_iterative(const InducedChain& chain, std::span<const double> r, double gamma) {
  const std::size_t m = chain.size();
  std::vector<double> q(r.begin(), r.end()), pq(m);
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    chain.apply(q, pq);
    double change = 0.0;
    for (std::size_t z = 0; z < m; ++z) {
      const double v = r[z] + gamma * pq[z];
      change = std::max(change, std::abs(v - q[z]));
      q[z] = v;
    }
    if (change <= 1e-13 * std::max(1.0, max_abs(q))) return q;
  }
  throw NumericalError("discounted value iteration did not converge");
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("discount factor must lie in [0, 1)");
}

std::string describe_local_pair(const LocalProjection& proj, std::size_t u, std::span<const AgentSpace> spaces) {
  const auto digits = proj.local_layout().decode(u);
  std::string out = "{";
  for (std::size_t k = 0; k < digits.size(); ++k) {
    const AgentId j = proj.members()[k];
    if (k) out += ", ";
    out += "agent " + std::to_string(j) + ": (s=" + std::to_string(spaces[j].pair_state(digits[k])) +
           ", a=" + std::to_string(spaces[j].pair_action(digits[k])) + ")";
  }
  return out + "}";
}

}  // namespace

std::vector<double> stationary_distribution(const InducedChain& chain, StationaryMethod method) {
  require_irreducible(chain);
  if (method == StationaryMethod::Auto) {
    method = chain.use_dense() ? StationaryMethod::Direct : StationaryMethod::Power;
  }
  std::vector<double> pi =
      method == StationaryMethod::Direct ? stationary_direct(chain.dense()) : stationary_power(chain);
  finish_distribution(chain, pi);
  return pi;
}

AverageReward average_reward(const InducedChain& chain, std::span<const double> pi) {
  AverageReward out;
  const std::size_t n = chain.mdp().agent_count();
  for (AgentId i = 0; i < n; ++i) out.per_agent.push_back(dot(pi, chain.reward_vector(i)));
  out.total = std::accumulate(out.per_agent.begin(), out.per_agent.end(), 0.0) / static_cast<double>(n);
  return out;
}

AverageReward average_reward(const FactoredMdp& mdp, const SoftmaxPolicy& policy, OracleLimits limits) {
  const InducedChain chain(mdp, policy, limits);
  const auto pi = stationary_distribution(chain);
  return average_reward(chain, pi);
}

std::vector<double> local_q_function(const InducedChain& chain, std::span<const double> pi, AgentId i) {
  auto d = centered_reward(chain, pi, i);
  std::vector<double> q;
  if (chain.use_dense()) {
    const Eigen::Index m = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - chain.dense() + Eigen::VectorXd::Ones(m) * view(pi).transpose();
    q = to_vector(a.partialPivLu().solve(view(d)));
    const double mean = dot(pi, q);
    for (double& v : q) v -= mean;
  } else {
    q = poisson_iterative(chain, pi, d);
  }
  check_poisson_residual(chain, q, d, i);
  return q;
}

std::vector<double> discounted_q(const InducedChain& chain, AgentId i, double gamma) {
  check_gamma(gamma);
  const auto r = chain.reward_vector(i);
  return chain.use_dense() ? discounted_dense(chain.dense(), r, gamma) : discounted_iterative(chain, r, gamma);
}

double mixing_norm(const InducedChain& chain, std::span<const double> pi) {
  const std::size_t m = chain.size();
  std::vector<double> sq(m), isq(m);
  for (std::size_t z = 0; z < m; ++z) {
    sq[z] = std::sqrt(pi[z]);
    isq[z] = 1.0 / sq[z];
  }
  if (chain.use_dense()) {
    const Eigen::Index mm = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd a = chain.dense();
    for (Eigen::Index z = 0; z < mm; ++z)
      for (Eigen::Index zn = 0; zn < mm; ++zn) a(z, zn) = sq[z] * (a(z, zn) - pi[zn]) * isq[zn];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
  }
  // Power iteration on A^T A with A = D^{1/2} (P - 1 pi^T) D^{-1/2}.
  Rng rng(0x5eed);
  std::vector<double> x(m), t(m), u(m), y(m);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  auto normalize = [](std::vector<double>& v) {
    const double nv = std::sqrt(dot(v, v));
    for (double& e : v) e /= nv;
    return nv;
  };
  normalize(x);
  double previous = -1.0;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    for (std::size_t z = 0; z < m; ++z) t[z] = isq[z] * x[z];
    chain.apply(t, u);
    const double mean = dot(pi, t);
    for (std::size_t z = 0; z < m; ++z) t[z] = sq[z] * (u[z] - mean);
    // t = A x; now y = A^T t.
    for (std::size_t z = 0; z < m; ++z) u[z] = sq[z] * t[z];
    const double total = std::accumulate(u.begin(), u.end(), 0.0);
    chain.apply_transpose(u, y);
    for (std::size_t z = 0; z < m; ++z) y[z] = isq[z] * (y[z] - pi[z] * total);
    x = y;
    const double lambda = normalize(x);
    if (std::abs(lambda - previous) <= 1e-11 * std::max(lambda, 1e-300)) return std::sqrt(lambda);
    previous = lambda;
  }
  throw NumericalError("power iteration for the mixing norm did not converge");
}

double perturbation_gap(const LocalProjection& keep, std::span<const double> q) {
  std::vector<double> lo(keep.size(), std::numeric_limits<double>::infinity());
  std::vector<double> hi(keep.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t z = 0; z < q.size(); ++z) {
    const std::size_t u = keep.project(z);
    lo[u] = std::min(lo[u], q[z]);
    hi[u] = std::max(hi[u], q[z]);
  }
  double gap = 0.0;
  for (std::size_t u = 0; u < keep.size(); ++u)
    if (hi[u] >= lo[u]) gap = std::max(gap, hi[u] - lo[u]);
  return gap;
}

// ---------------------------------------------------------------------------

ExactOracle::ExactOracle(const FactoredMdp& mdp, const SoftmaxPolicy& policy, OracleOptions options)
    : chain_(mdp, policy, options.limits) {
  require_irreducible(chain_);
  const std::size_t n = mdp.agent_count();
  std::vector<AgentId> agents = options.q_agents;
  if (agents.empty()) {
    agents.resize(n);
    std::iota(agents.begin(), agents.end(), AgentId{0});
  }
  q_.resize(n);
  has_q_.assign(n, 0);

  if (chain_.use_dense()) {
    const Eigen::MatrixXd p = chain_.dense();
    pi_ = stationary_direct(p);
    finish_distribution(chain_, pi_);
    const Eigen::Index m = p.rows();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - p + Eigen::VectorXd::Ones(m) * view(pi_).transpose();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    for (AgentId i : agents) {
      const auto d = centered_reward(chain_, pi_, i);
      auto q = to_vector(lu.solve(view(d)));
      const double mean = dot(pi_, q);
      for (double& v : q) v -= mean;
      check_poisson_residual(chain_, q, d, i);
      q_.at(i) = std::move(q);
      has_q_[i] = 1;
    }
  } else {
    pi_ = stationary_power(chain_);
    finish_distribution(chain_, pi_);
    for (AgentId i : agents) {
      const auto d = centered_reward(chain_, pi_, i);
      auto q = poisson_iterative(chain_, pi_, d);
      check_poisson_residual(chain_, q, d, i);
      q_.at(i) = std::move(q);
      has_q_[i] = 1;
    }
  }
  reward_ = netsac::average_reward(chain_, pi_);
}

double ExactOracle::min_stationary() const { return *std::min_element(pi_.begin(), pi_.end()); }

std::span<const double> ExactOracle::local_q(AgentId i) const {
  if (i >= q_.size() || !has_q_[i]) {
    throw std::logic_error("local Q-function of agent " + std::to_string(i) + " was not computed");
  }
  return q_[i];
}

std::vector<double> ExactOracle::global_q() const {
  const std::size_t n = mdp().agent_count();
  std::vector<double> q(chain_.size(), 0.0);
  for (AgentId j = 0; j < n; ++j) {
    const auto qj = local_q(j);
    for (std::size_t z = 0; z < q.size(); ++z) q[z] += qj[z];
  }
  for (double& v : q) v /= static_cast<double>(n);
  return q;
}

LocalProjection ExactOracle::projection(AgentId i, std::size_t kappa) const {
  return LocalProjection(mdp().spaces(), mdp().graph().kappa_neighborhood(i, kappa));
}

std::vector<double> ExactOracle::truncated_q(AgentId i, std::size_t kappa, WeightScheme scheme) const {
  const auto q = local_q(i);
  const auto proj = projection(i, kappa);
  std::vector<double> num(proj.size(), 0.0), den(proj.size(), 0.0);
  for (std::size_t z = 0; z < q.size(); ++z) {
    const std::size_t u = proj.project(z);
    const double w = scheme == WeightScheme::ConditionalStationary ? pi_[z] : 1.0;
    num[u] += w * q[z];
    den[u] += w;
  }
  for (std::size_t u = 0; u < proj.size(); ++u) {
    if (den[u] <= 0.0) {
      throw NumericalError("conditional truncation weights undefined: local pair " +
                           describe_local_pair(proj, u, mdp().spaces()) + " has zero stationary probability");
    }
    num[u] /= den[u];
  }
  return num;
}

GradientTables ExactOracle::score_expectation(std::span<const std::vector<double>> coefficients) const {
  const std::size_t n = mdp().agent_count();
  const auto& pairs = mdp().pair_layout();
  GradientTables out(n);
  for (AgentId i = 0; i < n; ++i) {
    const auto& sp = mdp().space(i);
    std::vector<double> acc(sp.pair_count(), 0.0);
    const auto& c = coefficients[i];
    for (std::size_t z = 0; z < chain_.size(); ++z) acc[pairs.digit(z, i)] += pi_[z] * c[z];
    auto& g = out[i];
    g.assign(sp.pair_count(), 0.0);
    for (Index s = 0; s < sp.state_count; ++s) {
      const auto probs = policy().distribution(i, s);
      double row_total = 0.0;
      for (Index a = 0; a < sp.action_count; ++a) row_total += acc[sp.pair_index(s, a)];
      for (Index a = 0; a < sp.action_count; ++a) {
        g[sp.pair_index(s, a)] = acc[sp.pair_index(s, a)] - probs[a] * row_total;
      }
    }
  }
  return out;
}

GradientTables ExactOracle::exact_policy_gradient() const {
  const auto q = global_q();
  std::vector<std::vector<double>> coeffs(mdp().agent_count(), q);
  return score_expectation(coeffs);
}

GradientTables ExactOracle::approx_policy_gradient(std::size_t kappa, WeightScheme scheme) const {
  const std::size_t n = mdp().agent_count();
  // Per agent j: Q~_j lifted back to Z.
  std::vector<std::vector<double>> lifted(n, std::vector<double>(chain_.size()));
  for (AgentId j = 0; j < n; ++j) {
    const auto qt = truncated_q(j, kappa, scheme);
    const auto proj = projection(j, kappa);
    for (std::size_t z = 0; z < chain_.size(); ++z) lifted[j][z] = qt[proj.project(z)];
  }
  std::vector<std::vector<double>> coeffs(n, std::vector<double>(chain_.size(), 0.0));
  for (AgentId i = 0; i < n; ++i) {
    for (AgentId j : mdp().graph().kappa_neighborhood(i, kappa))
      for (std::size_t z = 0; z < chain_.size(); ++z) coeffs[i][z] += lifted[j][z];
    for (double& v : coeffs[i]) v /= static_cast<double>(n);
  }
  return score_expectation(coeffs);
}

CriticFixedPoint ExactOracle::critic_fixed_point(AgentId i, std::size_t kappa, std::size_t dummy) const {
  const auto proj = projection(i, kappa);
  const std::size_t nl = proj.size();
  if (dummy >= nl) throw std::out_of_range("dummy pair outside the neighborhood table");
  const std::size_t m = chain_.size();
  const std::size_t ns = chain_.state_count();
  const auto r = chain_.reward_vector(i);
  const double j_i = reward_.per_agent.at(i);

  // Full system over Z_N:  A q = b  with
  //   A = Phi^T D Phi - Phi^T D P Phi,  b = Phi^T D (r - J_i 1),
  // where Phi^T D P Phi = H G, H(u, s') = sum_{z: z_N = u} pi(z) K(z, s'),
  // G(s', v) = sum_{z': s(z') = s', z'_N = v} zeta(a'|s').
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nl), static_cast<Eigen::Index>(ns));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nl));
  Eigen::VectorXd marginal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nl));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nl));
  for (std::size_t z = 0; z < m; ++z) {
    const auto u = static_cast<Eigen::Index>(proj.project(z));
    marginal(u) += pi_[z];
    b(u) += pi_[z] * (r[z] - j_i);
    for (std::size_t s = 0; s < ns; ++s) h(u, static_cast<Eigen::Index>(s)) += pi_[z] * chain_.state_transition(z, s);
    g(static_cast<Eigen::Index>(chain_.state_of(z)), u) += chain_.policy_weight(z);
  }
  Eigen::MatrixXd a = -h * g;
  a.diagonal() += marginal;

  // Drop the dummy row and column (its value is pinned to zero).
  const auto keep = static_cast<Eigen::Index>(nl - 1);
  Eigen::MatrixXd reduced(keep, keep);
  Eigen::VectorXd rhs(keep);
  std::vector<Eigen::Index> idx;
  for (std::size_t u = 0; u < nl; ++u)
    if (u != dummy) idx.push_back(static_cast<Eigen::Index>(u));
  for (Eigen::Index r1 = 0; r1 < keep; ++r1) {
    rhs(r1) = b(idx[static_cast<std::size_t>(r1)]);
    for (Eigen::Index c1 = 0; c1 < keep; ++c1) reduced(r1, c1) = a(idx[static_cast<std::size_t>(r1)], idx[static_cast<std::size_t>(c1)]);
  }

  CriticFixedPoint fp;
  fp.mu_hat = j_i;
  fp.dummy = dummy;
  fp.q_hat.assign(nl, 0.0);
  if (keep > 0) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
    if (!lu.isInvertible()) {
      throw NumericalError("critic fixed-point system of agent " + std::to_string(i) +
                           " is singular; the induced chain is not ergodic");
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    for (Eigen::Index k = 0; k < keep; ++k) fp.q_hat[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = x(k);
    fp.residual = (reduced * x - rhs).cwiseAbs().maxCoeff();
    if (!(fp.residual <= 1e-10)) {
      throw NumericalError("critic fixed-point solve of agent " + std::to_string(i) + " has residual " +
                           std::to_string(fp.residual));
    }
  }
  return fp;
}

double ExactOracle::critic_fixed_point_error(AgentId i, std::size_t kappa, const CriticFixedPoint& fp) const {
  const auto q = local_q(i);
  const auto proj = projection(i, kappa);
  double c = 0.0;
  for (std::size_t z = 0; z < q.size(); ++z) c += pi_[z] * (q[z] - fp.q_hat[proj.project(z)]);
  double sq = 0.0;
  for (std::size_t z = 0; z < q.size(); ++z) {
    const double e = fp.q_hat[proj.project(z)] + c - q[z];
    sq += pi_[z] * e * e;
  }
  return std::sqrt(sq);
}

double ExactOracle::mixing_norm() const { return netsac::mixing_norm(chain_, pi_); }

std::vector<double> ExactOracle::discounted_q(AgentId i, double gamma) const {
  return netsac::discounted_q(chain_, i, gamma);
}

}  // namespace netsac
