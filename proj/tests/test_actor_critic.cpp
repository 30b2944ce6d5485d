#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "netsac/actor_critic.hpp"
#include "netsac/errors.hpp"
#include "netsac/oracle.hpp"

using namespace netsac;
using netsac::testing::line_instance;

namespace {

CriticState two_agent_critic(std::size_t kappa) {
  const std::vector<AgentSpace> spaces(2, AgentSpace{2, 2});
  return CriticState::zeros(InteractionGraph::line(2), spaces, kappa);
}

TrainerConfig frozen_config(std::size_t horizon, std::uint64_t seed) {
  TrainerConfig cfg;
  cfg.kappa = 1;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.schedule.eta0 = 0.0;
  cfg.cadence = 1000;
  return cfg;
}

}  // namespace

TEST_CASE("truncated Q table") {
  const std::vector<AgentSpace> spaces(3, AgentSpace{2, 2});
  TruncatedQTable table(1, 1, LocalProjection(spaces, {0, 1, 2}), 5);
  CHECK(table.size() == 64);
  CHECK_FALSE(table.sparse());
  table.write(5, 3.0);
  CHECK(table.read(5) == 0.0);
  table.write(7, -2.0);
  table.write(9, 1.5);
  CHECK(table.max_abs() == 2.0);
  table.write(7, 0.5);
  CHECK(table.max_abs() == 1.5);
  const auto v = table.values();
  CHECK(v[5] == 0.0);
  CHECK(v[7] == 0.5);
  CHECK_THROWS(TruncatedQTable(1, 1, LocalProjection(spaces, {0, 1}), 16));

  SUBCASE("large neighborhoods are stored sparsely") {
    const std::vector<AgentSpace> big(12, AgentSpace{2, 2});
    std::vector<AgentId> all(12);
    std::iota(all.begin(), all.end(), AgentId{0});
    TruncatedQTable sparse(0, 11, LocalProjection(big, all));
    CHECK(sparse.size() == (std::size_t{1} << 24));
    CHECK(sparse.sparse());
    sparse.write(123456, -4.0);
    CHECK(sparse.read(123456) == -4.0);
    CHECK(sparse.read(654321) == 0.0);
    CHECK(sparse.max_abs() == 4.0);
  }
}

TEST_CASE("critic step") {
  SUBCASE("first update from zero tables") {
    auto c = two_agent_critic(0);
    const double v = critic_step(c, 0, 1, 1.0, 2, 0.5);
    CHECK(v == 0.5);
    CHECK(c.q[0].read(1) == 0.5);
    CHECK(c.mu_hat[0] == 0.5);
    CHECK(c.mu_hat[1] == 0.0);
  }
  SUBCASE("the TD target uses the pre-update average") {
    auto c = two_agent_critic(0);
    c.mu_hat[0] = 0.4;
    c.q[0].write(2, 1.0);
    c.q[0].write(3, 2.0);
    critic_step(c, 0, 3, 1.0, 2, 0.25);
    CHECK(c.q[0].read(3) == doctest::Approx(0.75 * 2.0 + 0.25 * (1.0 - 0.4 + 1.0)));
    CHECK(c.mu_hat[0] == doctest::Approx(0.75 * 0.4 + 0.25));
  }
  SUBCASE("current pair is the dummy: tables unchanged, average still moves") {
    auto c = two_agent_critic(1);
    c.q[0].write(4, 2.0);
    const auto before = c.q[0].values();
    critic_step(c, 0, c.q[0].dummy(), 1.0, 4, 0.5);
    CHECK(c.q[0].values() == before);
    CHECK(c.mu_hat[0] == 0.5);
  }
  SUBCASE("next pair is the dummy: bootstrap reads 0") {
    auto c = two_agent_critic(0);
    c.q[0].write(1, 2.0);
    c.mu_hat[0] = 0.2;
    critic_step(c, 0, 1, 1.0, c.q[0].dummy(), 0.5);
    CHECK(c.q[0].read(1) == doctest::Approx(0.5 * 2.0 + 0.5 * (1.0 - 0.2)));
  }
  SUBCASE("only the visited entry changes") {
    auto c = two_agent_critic(1);
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
      const std::size_t u = rng.uniform_index(16), w = rng.uniform_index(16);
      const auto before = c.q[1].values();
      const auto other = c.q[0].values();
      critic_step(c, 1, u, rng.uniform(), w, 0.3);
      const auto after = c.q[1].values();
      for (std::size_t x = 0; x < 16; ++x) {
        if (x != u) CHECK(after[x] == before[x]);
      }
      CHECK(after[0] == 0.0);
      CHECK(c.q[0].values() == other);
    }
  }
}

TEST_CASE("actor step") {
  SoftmaxPolicy policy(std::vector<AgentSpace>(2, AgentSpace{2, 2}));
  const JointState s{1, 0};
  const JointAction a{0, 1};

  SUBCASE("zero critic leaves the policy unchanged") {
    const auto c = two_agent_critic(1);
    const auto before = policy;
    const std::vector<std::size_t> local{3, 5};
    CHECK(rescale_factor(c) == 1.0);
    CHECK(actor_step(policy, c, s, a, local, 0.7, true) == 0.7);
    for (AgentId i = 0; i < 2; ++i) {
      CHECK(std::equal(policy.theta(i).begin(), policy.theta(i).end(), before.theta(i).begin()));
    }
  }

  // Observed pairs: z_0 = (s=1, a=0) -> 2, z_1 = (s=0, a=1) -> 1.
  SUBCASE("two agents, kappa 1: both see (3 + (-1)) / 2") {
    auto c = two_agent_critic(1);
    const std::size_t u = 2 + 4 * 1;  // joint little-endian index of (z_0, z_1)
    c.q[0].write(u, 3.0);
    c.q[1].write(u, -1.0);
    const std::vector<std::size_t> local{u, u};
    const double eta = 0.1;
    actor_step(policy, c, s, a, local, eta, false);
    const auto g0 = SoftmaxPolicy(std::vector<AgentSpace>(2, AgentSpace{2, 2})).grad_log(0, 1, 0);
    const auto g1 = SoftmaxPolicy(std::vector<AgentSpace>(2, AgentSpace{2, 2})).grad_log(1, 0, 1);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(policy.theta(0)[k] == doctest::Approx(eta * 1.0 * g0[k]));
      CHECK(policy.theta(1)[k] == doctest::Approx(eta * 1.0 * g1[k]));
    }
  }
  SUBCASE("two agents, kappa 0: each sees its own value over n") {
    auto c = two_agent_critic(0);
    c.q[0].write(2, 3.0);
    c.q[1].write(1, -1.0);
    const std::vector<std::size_t> local{2, 1};
    actor_step(policy, c, s, a, local, 0.1, false);
    const SoftmaxPolicy fresh(std::vector<AgentSpace>(2, AgentSpace{2, 2}));
    const auto g0 = fresh.grad_log(0, 1, 0);
    const auto g1 = fresh.grad_log(1, 0, 1);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(policy.theta(0)[k] == doctest::Approx(0.1 * 1.5 * g0[k]));
      CHECK(policy.theta(1)[k] == doctest::Approx(0.1 * -0.5 * g1[k]));
    }
  }
  SUBCASE("rescaling changes the step size only") {
    auto c = two_agent_critic(1);
    Rng rng(9);
    for (std::size_t u = 1; u < 16; ++u) {
      c.q[0].write(u, rng.uniform(-3, 3));
      c.q[1].write(u, rng.uniform(-3, 3));
    }
    const std::vector<std::size_t> local{6, 6};
    SoftmaxPolicy plain = policy, scaled = policy;
    actor_step(plain, c, s, a, local, 0.2, false);
    const double beta = actor_step(scaled, c, s, a, local, 0.2, true);
    const double gamma = rescale_factor(c);
    CHECK(gamma == doctest::Approx(1.0 / (1.0 + std::max(c.q[0].max_abs(), c.q[1].max_abs()))));
    CHECK(beta == doctest::Approx(0.2 * gamma));
    for (AgentId i = 0; i < 2; ++i) {
      // Both updates start from theta = 0, so theta is the update itself.
      const auto p = plain.theta(i), q = scaled.theta(i);
      for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(q[k] - gamma * p[k]) <= 1e-12);
      for (std::size_t k = 0; k < p.size(); ++k)
        for (std::size_t l = 0; l < p.size(); ++l) CHECK(std::abs(p[k] * q[l] - p[l] * q[k]) <= 1e-12);
    }
  }
}

TEST_CASE("step schedule and trainer config") {
  StepSchedule s{2.0, 0.75, 1.0, 0.99};
  CHECK(s.alpha(0) == 1.0);  // capped
  CHECK(s.alpha(15) == doctest::Approx(2.0 / 8.0));
  CHECK(s.eta(0) == 1.0);
  for (std::size_t t = 0; t < 100; ++t) {
    CHECK(s.alpha(t + 1) <= s.alpha(t));
    CHECK(s.eta(t + 1) / s.alpha(t + 1) <= s.eta(t) / s.alpha(t));
  }
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS((StepSchedule{1.0, 0.5, 1.0, 0.9}.validate()), ConfigError);
  CHECK_THROWS_AS((StepSchedule{1.0, 0.8, 1.0, 0.8}.validate()), ConfigError);
  CHECK_THROWS_AS((StepSchedule{0.0, 0.8, 1.0, 0.9}.validate()), ConfigError);
  CHECK_THROWS_AS((StepSchedule{1.0, 0.8, -1.0, 0.9}.validate()), ConfigError);
  TrainerConfig cfg;
  cfg.horizon = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("single iteration performs one critic and one actor update") {
  const auto inst = line_instance(21, 3, 0.3);
  const MdpEnvironment env(inst.mdp);
  TrainerConfig cfg;
  cfg.horizon = 1;
  cfg.seed = 5;
  const auto run = run_actor_critic(env, inst.policy, cfg);

  Rng rng = Rng::stream(5, "trajectory");
  const JointState s = env.initial_state(rng);
  const JointAction a = inst.policy.sample(s, rng);
  JointState next(3);
  std::vector<double> r(3);
  env.step(s, a, rng, next, r);
  JointAction a_next(3);
  for (AgentId i = 0; i < 3; ++i) a_next[i] = inst.policy.sample(i, next[i], rng);
  auto critic = CriticState::zeros(env.graph(), env.spaces(), 1);
  std::vector<Index> pairs(3), pairs_next(3);
  for (AgentId i = 0; i < 3; ++i) {
    pairs[i] = env.spaces()[i].pair_index(s[i], a[i]);
    pairs_next[i] = env.spaces()[i].pair_index(next[i], a_next[i]);
  }
  std::vector<std::size_t> local(3), local_next(3);
  for (AgentId i = 0; i < 3; ++i) {
    local[i] = critic.q[i].projection().project_pairs(pairs);
    local_next[i] = critic.q[i].projection().project_pairs(pairs_next);
  }
  SoftmaxPolicy policy = inst.policy;
  actor_step(policy, critic, s, a, local, cfg.schedule.eta(0), false);
  for (AgentId i = 0; i < 3; ++i) critic_step(critic, i, local[i], r[i], local_next[i], cfg.schedule.alpha(0));

  CHECK(run.critic.mu_hat == critic.mu_hat);
  for (AgentId i = 0; i < 3; ++i) {
    CHECK(run.critic.q[i].values() == critic.q[i].values());
    CHECK(std::equal(policy.theta(i).begin(), policy.theta(i).end(), run.policy.theta(i).begin()));
  }
  REQUIRE(run.metrics.rows.size() == 1);
  CHECK(run.metrics.rows[0].step == 1);
  CHECK(run.metrics.rows[0].mean_reward == doctest::Approx((r[0] + r[1] + r[2]) / 3));
  CHECK(run.metrics.terminal_reward == run.metrics.rows[0].mean_reward);
}

TEST_CASE("runs are deterministic in the seed") {
  const auto inst = line_instance(3, 3, 0.3);
  const MdpEnvironment env(inst.mdp);
  TrainerConfig cfg;
  cfg.horizon = 5000;
  cfg.seed = 8;
  const auto a = run_actor_critic(env, inst.policy, cfg);
  const auto b = run_actor_critic(env, inst.policy, cfg);
  cfg.seed = 9;
  const auto c = run_actor_critic(env, inst.policy, cfg);
  REQUIRE(a.metrics.rows.size() == 50);
  for (std::size_t k = 0; k < a.metrics.rows.size(); ++k) {
    CHECK(a.metrics.rows[k].mean_reward == b.metrics.rows[k].mean_reward);
    CHECK(a.metrics.rows[k].mean_mu_hat == b.metrics.rows[k].mean_mu_hat);
  }
  for (AgentId i = 0; i < 3; ++i) {
    CHECK(std::equal(a.policy.theta(i).begin(), a.policy.theta(i).end(), b.policy.theta(i).begin()));
  }
  CHECK(a.critic.mu_hat != c.critic.mu_hat);
}

TEST_CASE("oracle hook cadence") {
  const auto inst = line_instance(3, 3, 0.3);
  const MdpEnvironment env(inst.mdp);
  TrainerConfig cfg;
  cfg.horizon = 1050;
  cfg.oracle_every = 500;
  int calls = 0;
  const auto run = run_actor_critic(env, inst.policy, cfg, [&](const SoftmaxPolicy& p) {
    ++calls;
    const ExactOracle o(inst.mdp, p);
    return OracleSample{o.average_reward().total, norm(o.exact_policy_gradient())};
  });
  // initial, steps 500, 1000, 1050, final
  CHECK(calls == 5);
  REQUIRE(run.metrics.initial);
  REQUIRE(run.metrics.final);
  CHECK(run.metrics.initial->objective == doctest::Approx(ExactOracle(inst.mdp, inst.policy).average_reward().total));
  std::size_t evaluated = 0;
  for (const auto& row : run.metrics.rows) evaluated += std::isfinite(row.objective);
  CHECK(evaluated == 3);
  CHECK(run.metrics.rows.back().step == 1050);
}

TEST_CASE("frozen critic stays bounded") {
  for (std::uint64_t seed : {1, 2}) {
    const auto inst = line_instance(seed, 3, 0.3);
    const MdpEnvironment env(inst.mdp);
    auto cfg = frozen_config(1'000'000, seed);
    cfg.rescale = true;
    cfg.schedule.alpha0 = 1.0;
    const auto run = run_actor_critic(env, inst.policy, cfg);
    const ExactOracle oracle(inst.mdp, inst.policy);
    const double bound = 10.0 * inst.mdp.r_max() / (1.0 - oracle.mixing_norm());
    CHECK(run.metrics.q_sup <= bound);
    for (AgentId i = 0; i < 3; ++i) {
      CHECK(std::equal(run.policy.theta(i).begin(), run.policy.theta(i).end(), inst.policy.theta(i).begin()));
    }
  }
}

TEST_CASE("average-reward estimate matches the exact value") {
  // A running mean (alpha_t = 1/(t+1)) on a frozen trajectory, with the
  // standard error from batch means of the same reward stream.
  const auto inst = line_instance(14, 3, 0.3);
  const MdpEnvironment env(inst.mdp);
  const ExactOracle oracle(inst.mdp, inst.policy);
  const std::size_t steps = 400'000, batches = 40;
  auto critic = CriticState::zeros(env.graph(), env.spaces(), 1);
  Rng rng = Rng::stream(2, "trajectory");
  JointState s = env.initial_state(rng), next(3);
  std::vector<double> r(3);
  std::vector<std::vector<double>> batch_sums(3, std::vector<double>(batches, 0.0));
  for (std::size_t t = 0; t < steps; ++t) {
    const JointAction a = inst.policy.sample(s, rng);
    env.step(s, a, rng, next, r);
    for (AgentId i = 0; i < 3; ++i) {
      critic_step(critic, i, 1, r[i], 1, 1.0 / static_cast<double>(t + 1));
      batch_sums[i][t / (steps / batches)] += r[i];
    }
    s.swap(next);
  }
  for (AgentId i = 0; i < 3; ++i) {
    std::vector<double> means;
    for (double b : batch_sums[i]) means.push_back(b / static_cast<double>(steps / batches));
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / batches;
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    const double se = std::sqrt(var / (batches - 1) / batches);
    CHECK(critic.mu_hat[i] == doctest::Approx(m).epsilon(1e-9));
    CHECK(std::abs(critic.mu_hat[i] - oracle.average_reward().per_agent[i]) <= 3 * se);
  }
}

TEST_CASE("mismatched initial policy is rejected") {
  const auto inst = line_instance(3, 3);
  const MdpEnvironment env(inst.mdp);
  const SoftmaxPolicy wrong(std::vector<AgentSpace>(2, AgentSpace{2, 2}));
  CHECK_THROWS_AS(run_actor_critic(env, wrong, TrainerConfig{}), ConfigError);
}
