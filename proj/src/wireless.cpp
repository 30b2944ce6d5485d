#include "netsac/wireless.hpp"

#include <algorithm>
#include <string>

#include "netsac/errors.hpp"

namespace netsac {

namespace {

void check_probabilities(std::span<const double> p, std::size_t expected, const char* what) {
  if (p.size() != expected) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(expected) + " values, got " +
                      std::to_string(p.size()));
  }
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + ": probabilities must lie in [0, 1]");
  }
}

// Next local state after the send outcome and deadline shift, before arrival.
Index shifted(Index state, bool sent) {
  if (sent) state &= state - 1;  // clears the lowest set bit: the most urgent packet
  return state >> 1;
}

}  // namespace

WirelessEnv::WirelessEnv(const WirelessConfig& config) : deadline_(config.deadline) {
  if (config.rows == 0 || config.cols == 0) throw ConfigError("wireless grid must have at least one row and column");
  if (config.deadline == 0) throw ConfigError("wireless deadline must be at least 1");
  if (config.deadline > 20) throw ConfigError("wireless deadline above 20 is not supported");
  const std::size_t users = config.rows * config.cols;
  const std::size_t aps = (config.rows + 1) * (config.cols + 1);

  aps_.resize(users);
  sharers_.assign(aps, 0);
  for (std::size_t r = 0; r < config.rows; ++r) {
    for (std::size_t c = 0; c < config.cols; ++c) {
      auto& y = aps_[r * config.cols + c];
      y = {r * (config.cols + 1) + c, r * (config.cols + 1) + c + 1, (r + 1) * (config.cols + 1) + c,
           (r + 1) * (config.cols + 1) + c + 1};
      std::sort(y.begin(), y.end());
      for (std::size_t k : y) ++sharers_[k];
    }
  }

  Rng rng = Rng::stream(config.seed, "instance-gen");
  if (config.arrival.empty()) {
    for (std::size_t i = 0; i < users; ++i) arrival_.push_back(rng.uniform());
  } else {
    check_probabilities(config.arrival, users, "arrival probabilities");
    arrival_ = config.arrival;
  }
  if (config.success.empty()) {
    for (std::size_t k = 0; k < aps; ++k) success_.push_back(rng.uniform());
  } else {
    check_probabilities(config.success, aps, "success probabilities");
    success_ = config.success;
  }

  std::vector<std::pair<AgentId, AgentId>> edges;
  for (AgentId i = 0; i < users; ++i) {
    for (AgentId j = i + 1; j < users; ++j) {
      const bool share = std::any_of(aps_[i].begin(), aps_[i].end(), [&](std::size_t k) {
        return std::find(aps_[j].begin(), aps_[j].end(), k) != aps_[j].end();
      });
      if (share) edges.emplace_back(i, j);
    }
  }
  graph_ = InteractionGraph(users, edges);
  for (AgentId i = 0; i < users; ++i) spaces_.push_back(AgentSpace{std::size_t{1} << deadline_, 1 + aps_[i].size()});
  senders_.assign(aps, 0);
  draws_.assign(aps, 0.0);
}

void WirelessEnv::step(std::span<const Index> s, std::span<const Index> a, Rng& rng, std::span<Index> next,
                       std::span<double> rewards) const {
  const std::size_t users = user_count();
  std::fill(senders_.begin(), senders_.end(), 0);
  for (AgentId i = 0; i < users; ++i) {
    const Index act = effective_action(s[i], a[i]);
    if (act != 0) ++senders_[target(i, act)];
  }
  for (double& u : draws_) u = rng.uniform();
  for (AgentId i = 0; i < users; ++i) {
    const Index act = effective_action(s[i], a[i]);
    bool sent = false;
    if (act != 0) {
      const std::size_t k = target(i, act);
      sent = senders_[k] == 1 && draws_[k] < success_[k];
    }
    rewards[i] = sent ? 1.0 : 0.0;
    next[i] = shifted(s[i], sent);
  }
  for (AgentId i = 0; i < users; ++i) {
    if (rng.uniform() < arrival_[i]) next[i] |= Index{1} << (deadline_ - 1);
  }
}

WirelessEnv::LocalOutcome WirelessEnv::local_transition(AgentId i, std::span<const Index> s,
                                                        std::span<const Index> a) const {
  LocalOutcome out;
  out.next_state.assign(spaces_.at(i).state_count, 0.0);
  const Index act = effective_action(s[i], a[i]);
  double p_sent = 0.0;
  if (act != 0) {
    const std::size_t k = target(i, act);
    std::size_t count = 0;
    for (AgentId j : graph_.neighbors(i)) {
      const Index other = effective_action(s[j], a[j]);
      if (other != 0 && target(j, other) == k) ++count;
    }
    if (count == 1) p_sent = success_[k];
  }
  out.reward_probability = p_sent;
  const Index arrival_bit = Index{1} << (deadline_ - 1);
  const double p = arrival_[i];
  auto add = [&](Index st, double w) {
    if (w <= 0.0) return;
    out.next_state[st] += w * (1.0 - p);
    out.next_state[st | arrival_bit] += w * p;
  };
  add(shifted(s[i], true), p_sent);
  add(shifted(s[i], false), 1.0 - p_sent);
  return out;
}

AlohaPolicy::AlohaPolicy(const WirelessEnv& env, double p_send) : p_send_(p_send) {
  if (!(p_send >= 0.0 && p_send <= 1.0)) throw ConfigError("ALOHA send probability must lie in [0, 1]");
  for (AgentId i = 0; i < env.user_count(); ++i) {
    const auto y = env.access_points(i);
    std::vector<double> w(y.size());
    double total = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      w[k] = env.success()[y[k]] / static_cast<double>(env.sharers(y[k]));
      total += w[k];
    }
    if (total <= 0.0) {
      std::fill(w.begin(), w.end(), 1.0);
      total = static_cast<double>(w.size());
    }
    std::vector<double> probs{1.0 - p_send};
    for (double v : w) probs.push_back(p_send * v / total);
    probs_.push_back(std::move(probs));
  }
}

}  // namespace netsac
