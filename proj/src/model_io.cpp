#include "netsac/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "netsac/errors.hpp"

namespace netsac {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& require(const json& doc, const std::string& key, const std::string& where) {
  if (!doc.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return doc.at(key);
}

template <typename T>
T as(const json& value, const std::string& what) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

FactoredMdp mdp_from_json(const json& doc) {
  const std::string where = "model";
  reject_unknown_keys(doc, {"agents", "edges", "state_counts", "action_counts", "r_max", "kernels", "rewards"},
                      where);
  const auto n = as<std::size_t>(require(doc, "agents", where), "agents");
  const auto edges = as<std::vector<std::pair<AgentId, AgentId>>>(
      doc.contains("edges") ? doc.at("edges") : json::array(), "edges");
  InteractionGraph graph(n, edges);

  const auto states = as<std::vector<std::size_t>>(require(doc, "state_counts", where), "state_counts");
  const auto actions = as<std::vector<std::size_t>>(require(doc, "action_counts", where), "action_counts");
  if (states.size() != n || actions.size() != n) {
    throw ConfigError("model: state_counts/action_counts must list " + std::to_string(n) + " agents");
  }
  std::vector<AgentSpace> spaces;
  for (std::size_t i = 0; i < n; ++i) {
    if (states[i] == 0 || actions[i] == 0) {
      throw ConfigError("model: agent " + std::to_string(i) + " has an empty state or action set");
    }
    spaces.push_back({states[i], actions[i]});
  }
  const double r_max = as<double>(require(doc, "r_max", where), "r_max");

  const auto& kernels_doc = require(doc, "kernels", where);
  const auto& rewards_doc = require(doc, "rewards", where);
  if (!kernels_doc.is_array() || kernels_doc.size() != n) {
    throw ConfigError("model: 'kernels' must hold one table per agent");
  }
  if (!rewards_doc.is_array() || rewards_doc.size() != n) {
    throw ConfigError("model: 'rewards' must hold one table per agent");
  }

  std::vector<LocalKernel> kernels;
  std::vector<LocalReward> rewards;
  for (AgentId i = 0; i < n; ++i) {
    std::vector<std::size_t> radices;
    for (AgentId j : graph.neighbors(i)) radices.push_back(spaces[j].state_count);
    radices.push_back(spaces[i].action_count);
    const MixedRadix layout(radices);
    const std::string who = "kernel of agent " + std::to_string(i);
    const auto rows = as<std::vector<std::vector<double>>>(kernels_doc[i], who);
    if (rows.size() != layout.size()) {
      throw ConfigError(who + ": expected " + std::to_string(layout.size()) + " rows, got " +
                        std::to_string(rows.size()));
    }
    std::vector<double> flat;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != spaces[i].state_count) {
        throw ConfigError(who + ", row " + std::to_string(r) + ": expected " +
                          std::to_string(spaces[i].state_count) + " entries");
      }
      flat.insert(flat.end(), rows[r].begin(), rows[r].end());
    }
    kernels.emplace_back(i, radices, spaces[i].state_count, std::move(flat));

    const std::string rwho = "reward of agent " + std::to_string(i);
    const auto rtab = as<std::vector<std::vector<double>>>(rewards_doc[i], rwho);
    if (rtab.size() != spaces[i].state_count) {
      throw ConfigError(rwho + ": expected " + std::to_string(spaces[i].state_count) + " rows");
    }
    std::vector<double> rflat;
    for (std::size_t s = 0; s < rtab.size(); ++s) {
      if (rtab[s].size() != spaces[i].action_count) {
        throw ConfigError(rwho + ", row " + std::to_string(s) + ": expected " +
                          std::to_string(spaces[i].action_count) + " entries");
      }
      rflat.insert(rflat.end(), rtab[s].begin(), rtab[s].end());
    }
    rewards.emplace_back(i, spaces[i], std::move(rflat), r_max);
  }
  return FactoredMdp(std::move(graph), std::move(spaces), std::move(kernels), std::move(rewards), r_max);
}

json mdp_to_json(const FactoredMdp& mdp) {
  json doc;
  const std::size_t n = mdp.agent_count();
  doc["agents"] = n;
  doc["edges"] = mdp.graph().edges();
  std::vector<std::size_t> states, actions;
  for (const auto& sp : mdp.spaces()) {
    states.push_back(sp.state_count);
    actions.push_back(sp.action_count);
  }
  doc["state_counts"] = states;
  doc["action_counts"] = actions;
  doc["r_max"] = mdp.r_max();
  json kernels = json::array();
  json rewards = json::array();
  for (AgentId i = 0; i < n; ++i) {
    const auto& k = mdp.kernel(i);
    json rows = json::array();
    for (std::size_t r = 0; r < k.row_count(); ++r) {
      const auto row = k.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    kernels.push_back(std::move(rows));
    const auto& sp = mdp.space(i);
    json rtab = json::array();
    for (Index s = 0; s < sp.state_count; ++s) {
      std::vector<double> row;
      for (Index a = 0; a < sp.action_count; ++a) row.push_back(mdp.reward(i)(s, a));
      rtab.push_back(row);
    }
    rewards.push_back(std::move(rtab));
  }
  doc["kernels"] = std::move(kernels);
  doc["rewards"] = std::move(rewards);
  return doc;
}

SoftmaxPolicy policy_from_json(const json& doc, std::span<const AgentSpace> spaces) {
  // Policy files written by a training run also carry the run's config.
  reject_unknown_keys(doc, {"theta", "config"}, "policy");
  const auto& theta_doc = require(doc, "theta", "policy");
  if (!theta_doc.is_array() || theta_doc.size() != spaces.size()) {
    throw ConfigError("policy: 'theta' must hold one table per agent");
  }
  GradientTables theta;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const auto rows = as<std::vector<std::vector<double>>>(theta_doc[i], "policy table " + std::to_string(i));
    if (rows.size() != spaces[i].state_count) {
      throw ConfigError("policy table of agent " + std::to_string(i) + ": expected " +
                        std::to_string(spaces[i].state_count) + " rows");
    }
    std::vector<double> flat;
    for (std::size_t s = 0; s < rows.size(); ++s) {
      if (rows[s].size() != spaces[i].action_count) {
        throw ConfigError("policy table of agent " + std::to_string(i) + ", row " + std::to_string(s) +
                          ": expected " + std::to_string(spaces[i].action_count) + " entries");
      }
      flat.insert(flat.end(), rows[s].begin(), rows[s].end());
    }
    theta.push_back(std::move(flat));
  }
  return SoftmaxPolicy(spaces, std::move(theta));
}

json policy_to_json(const SoftmaxPolicy& policy) {
  json theta = json::array();
  for (AgentId i = 0; i < policy.agent_count(); ++i) {
    const auto& sp = policy.space(i);
    const auto table = policy.theta(i);
    json rows = json::array();
    for (Index s = 0; s < sp.state_count; ++s) {
      rows.push_back(std::vector<double>(table.begin() + s * sp.action_count,
                                         table.begin() + (s + 1) * sp.action_count));
    }
    theta.push_back(std::move(rows));
  }
  return json{{"theta", std::move(theta)}};
}

json read_json_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (!text.empty() && text.front() == '#') {
    std::istringstream lines(text);
    std::string line;
    const std::string tag = "# config: ";
    while (std::getline(lines, line) && !line.empty() && line.front() == '#') {
      if (line.rfind(tag, 0) == 0) {
        try {
          return json::parse(line.substr(tag.size()));
        } catch (const json::exception& e) {
          throw ConfigError(path.string() + ": malformed config header: " + e.what());
        }
      }
    }
    throw ConfigError(path.string() + ": no '# config:' header line");
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

FactoredMdp load_mdp(const std::filesystem::path& path) { return mdp_from_json(read_json_document(path)); }

void save_mdp(const FactoredMdp& mdp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << mdp_to_json(mdp).dump(1) << '\n';
}

SoftmaxPolicy load_policy(const std::filesystem::path& path, std::span<const AgentSpace> spaces) {
  return policy_from_json(read_json_document(path), spaces);
}

void save_policy(const SoftmaxPolicy& policy, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << policy_to_json(policy).dump(1) << '\n';
}

}  // namespace netsac
