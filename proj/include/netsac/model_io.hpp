#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "netsac/factored_mdp.hpp"
#include "netsac/softmax_policy.hpp"

namespace netsac {

// Model file (JSON):
//   {
//     "agents": n,
//     "edges": [[i, j], ...],
//     "state_counts": [|S_0|, ...], "action_counts": [|A_0|, ...],
//     "r_max": r̄,
//     "kernels": [agent][row][s_i'],   rows ordered as in LocalKernel
//     "rewards": [agent][s_i][a_i]
//   }
// Unknown keys are rejected; every invariant is checked on load and the first
// violation is reported with its agent and row.
FactoredMdp mdp_from_json(const nlohmann::json& doc);
nlohmann::json mdp_to_json(const FactoredMdp& mdp);
FactoredMdp load_mdp(const std::filesystem::path& path);
void save_mdp(const FactoredMdp& mdp, const std::filesystem::path& path);

// Policy companion file: {"theta": [agent][s_i][a_i]}, optionally with a
// "config" object that is ignored on load.
SoftmaxPolicy policy_from_json(const nlohmann::json& doc, std::span<const AgentSpace> spaces);
nlohmann::json policy_to_json(const SoftmaxPolicy& policy);
SoftmaxPolicy load_policy(const std::filesystem::path& path, std::span<const AgentSpace> spaces);
void save_policy(const SoftmaxPolicy& policy, const std::filesystem::path& path);

// Reads a JSON document; also accepts an output file of this toolkit whose
// header carries a "# config: {...}" line.
nlohmann::json read_json_document(const std::filesystem::path& path);

}  // namespace netsac
