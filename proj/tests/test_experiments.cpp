#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "netsac/errors.hpp"
#include "netsac/experiments.hpp"
#include "netsac/model_io.hpp"

using namespace netsac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("netsac_test_experiments") / name;
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string body(const fs::path& path) {
  const auto all = lines(path);
  std::string out;
  for (std::size_t k = 1; k < all.size(); ++k) out += all[k] + "\n";
  return out;
}

json header_config(const fs::path& csv) {
  const auto first = lines(csv).at(0);
  const std::string prefix = "# config: ";
  REQUIRE(first.rfind(prefix, 0) == 0);
  return json::parse(first.substr(prefix.size()));
}

CommandResult run(const std::string& command, json overrides) {
  std::ostringstream log;
  return run_command(resolve_config(command, overrides), log);
}

// Agents whose kernels ignore the neighbors and whose rewards are constant.
FactoredMdp decoupled_chain() {
  const std::size_t n = 3;
  const auto graph = InteractionGraph::line(n);
  std::vector<AgentSpace> spaces(n, AgentSpace{2, 2});
  std::vector<LocalKernel> kernels;
  std::vector<LocalReward> rewards;
  for (AgentId i = 0; i < n; ++i) {
    std::vector<std::size_t> radices;
    for (std::size_t k = 0; k < graph.neighbors(i).size(); ++k) radices.push_back(2);
    radices.push_back(2);
    std::size_t rows = 1;
    for (auto r : radices) rows *= r;
    std::vector<double> table;
    for (std::size_t r = 0; r < rows; ++r) {
      table.push_back(0.3);
      table.push_back(0.7);
    }
    kernels.emplace_back(i, radices, 2, table);
    rewards.emplace_back(i, spaces[i], std::vector<double>(4, 0.5), 1.0);
  }
  return FactoredMdp(graph, spaces, std::move(kernels), std::move(rewards), 1.0);
}

}  // namespace

TEST_CASE("configuration handling") {
  SUBCASE("defaults cover every command") {
    for (const auto& name : command_names()) {
      const auto cfg = default_config(name);
      CHECK(cfg.at("command") == name);
      CHECK(cfg.contains("out"));
      CHECK(resolve_config(name, json::object()) == cfg);
    }
    CHECK_THROWS_AS(default_config("plot"), ConfigError);
  }
  SUBCASE("nested overrides merge into the defaults") {
    const auto cfg = resolve_config("train", {{"env", {{"kind", "wireless"}, {"wireless", {{"rows", 2}}}}}});
    CHECK(cfg["env"]["kind"] == "wireless");
    CHECK(cfg["env"]["wireless"]["rows"] == 2);
    CHECK(cfg["env"]["wireless"]["cols"] == 3);
    CHECK(cfg["horizon"] == 200000);
  }
  SUBCASE("unknown keys are rejected at any depth") {
    CHECK_THROWS_AS(resolve_config("decay", {{"instance", 3}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("train", {{"schedule", {{"alpha", 1}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("train", {{"schedule", 3}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("verify", {{"command", "decay"}}), ConfigError);
  }
  SUBCASE("ill-typed values fail before any computation") {
    CHECK_THROWS_AS(run("decay", {{"trials", "many"}, {"out", scratch("typed").string()}}), ConfigError);
    CHECK_THROWS_AS(run("train", {{"seeds", json::array()}, {"out", scratch("typed").string()}}), ConfigError);
    CHECK_THROWS_AS(run("benchmark", {{"p_send", {1.5}}, {"out", scratch("typed").string()}}), ConfigError);
    CHECK_THROWS_AS(run("train", {{"schedule", {{"alpha_exp", 0.4}}}, {"out", scratch("typed").string()}}),
                    ConfigError);
    CHECK_FALSE(fs::exists(scratch("typed") / "decay.csv"));
  }
  SUBCASE("an earlier output's config is unwrapped") {
    const json doc = {{"config", {{"command", "verify"}, {"seed", 7}}}, {"status", "pass"}};
    CHECK(resolve_config("verify", doc)["seed"] == 7);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(ModelClassError("x")) == 3);
  CHECK(exit_code_for(SizeGuardError("x")) == 4);
  CHECK(exit_code_for(NumericalError("x")) == 5);
  CHECK(exit_code_for(std::runtime_error("x")) == 2);
  CHECK_THROWS_AS(run("verify", {{"wireless", {{"rows", 3}}}, {"out", scratch("class").string()}}), ModelClassError);
  CHECK_THROWS_AS(run("train", {{"env", {{"kind", "wireless"}}}, {"oracle_every", 100}, {"horizon", 100},
                                {"out", scratch("class").string()}}),
                  ModelClassError);
  CHECK_THROWS_AS(run("decay", {{"generator", {{"n", 12}}}, {"instances", 1}, {"trials", 1},
                                {"out", scratch("guard").string()}}),
                  SizeGuardError);
}

TEST_CASE("decay command") {
  const auto dir = scratch("decay");
  const auto res = run("decay", {{"generator", {{"n", 4}}}, {"instances", 2}, {"trials", 3}, {"seed", 10},
                                 {"out", dir.string()}});
  CHECK(res.exit_code == 0);
  const auto rows = lines(dir / "decay.csv");
  REQUIRE(rows.size() == 2 + 2 * 4 * 3);
  CHECK(rows[1] == "instance,kappa,trial,value");
  for (std::size_t k = 2; k < rows.size(); ++k) {
    if (rows[k].find(",3,") != std::string::npos) CHECK(rows[k].substr(rows[k].rfind(',') + 1) == "0");
  }
  const auto summary = res.summary;
  CHECK(summary["instances"].size() == 2);
  CHECK(summary["instances"][1]["seed"] == 11);
  CHECK(summary["instances"][0]["median"].size() == 4);
  CHECK(summary["aggregate"]["all_finite"] == true);
  CHECK(fs::exists(dir / "decay_summary.json"));
}

TEST_CASE("verify command") {
  SUBCASE("decoupled agents pass every check with zero error") {
    const auto dir = scratch("verify_decoupled");
    fs::create_directories(dir);
    save_mdp(decoupled_chain(), dir / "model.json");
    const auto res = run("verify", {{"model", (dir / "model.json").string()}, {"out", dir.string()}});
    CHECK(res.exit_code == 0);
    CHECK(res.summary["rho_bound"] == 0.0);
    CHECK(res.summary["failures"] == 0);
    CHECK(res.summary["status"] == "pass");
    const auto rows = lines(dir / "verify.csv");
    for (std::size_t k = 2; k < rows.size(); ++k) {
      CHECK(rows[k].substr(rows[k].rfind(',') + 1) == "pass");
    }
  }
  SUBCASE("a coupled random chain passes") {
    const auto res = run("verify", {{"seed", 4}, {"out", scratch("verify_random").string()}});
    CHECK(res.summary["condition_met"] == true);
    CHECK(res.summary["failures"] == 0);
    CHECK(res.exit_code == 0);
  }
  SUBCASE("bounds are marked not applicable when the condition fails") {
    const auto dir = scratch("verify_strong");
    const auto res = run("verify", {{"generator", {{"coupling", 1.0}}}, {"seed", 2}, {"out", dir.string()}});
    REQUIRE(res.summary["rho_bound"].get<double>() >= 1.0);
    CHECK(res.exit_code == 0);
    CHECK(res.summary["status"] == "condition not met");
    std::size_t na = 0, measured = 0;
    for (const auto& row : lines(dir / "verify.csv")) {
      na += row.ends_with(",n/a");
      measured += row.find(",q_decay,") != std::string::npos;
    }
    CHECK(na > 0);
    CHECK(measured == 3 * 3);
  }
}

TEST_CASE("train command") {
  const auto dir = scratch("train");
  const auto res = run("train", {{"seeds", {0, 1, 2}}, {"horizon", 3000}, {"out", dir.string()}});
  CHECK(res.exit_code == 0);
  std::size_t metrics = 0, policies = 0, summaries = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    metrics += name.starts_with("metrics_");
    policies += name.starts_with("policy_");
    summaries += name == "train_summary.json";
  }
  CHECK(metrics == 3);
  CHECK(policies == 3);
  CHECK(summaries == 1);
  CHECK(lines(dir / "metrics_seed1.csv").size() == 2 + 30);
  CHECK(lines(dir / "metrics_seed1.csv")[1] == "step,mean_reward,mean_mu_hat");
  CHECK(res.summary["runs"].size() == 3);

  SUBCASE("policy files load back with their config") {
    const auto doc = read_json_document(dir / "policy_seed2.json");
    CHECK(doc["config"]["seeds"].size() == 3);
  }
  SUBCASE("frozen policy with oracle columns and critic tracking") {
    const auto fdir = scratch("train_frozen");
    const auto fr = run("train", {{"frozen_policy", true}, {"horizon", 2000}, {"oracle_every", 1000},
                                  {"out", fdir.string()}});
    CHECK(lines(fdir / "metrics_seed0.csv")[1] == "step,mean_reward,mean_mu_hat,J_exact,grad_norm");
    const auto& r = fr.summary["runs"][0];
    CHECK(r["J_initial"] == r["J_final"]);
    CHECK(r.contains("critic_linf"));
    CHECK(r["critic_tracking"].size() == 3);
  }
  SUBCASE("wireless environment") {
    const auto wdir = scratch("train_wireless");
    const auto wr = run("train", {{"env", {{"kind", "wireless"}, {"wireless", {{"rows", 2}, {"cols", 2}}}}},
                                  {"horizon", 500},
                                  {"window", 100},
                                  {"out", wdir.string()}});
    CHECK(wr.exit_code == 0);
    const double tr = wr.summary["runs"][0]["terminal_reward"];
    CHECK((tr >= 0.0 && tr <= 1.0));
  }
}

TEST_CASE("benchmark command") {
  SUBCASE("zero success probability or zero send probability earns nothing") {
    const auto dir = scratch("bench_zero");
    json wireless = {{"rows", 2}, {"cols", 2}, {"success", std::vector<double>(9, 0.0)}};
    const auto res = run("benchmark", {{"wireless", wireless}, {"horizon", 200}, {"episodes", 3},
                                       {"out", dir.string()}});
    for (const auto& s : res.summary["settings"]) CHECK(s["mean_reward"] == 0.0);
    const auto idle = run("benchmark", {{"p_send", {0.0}}, {"horizon", 200}, {"episodes", 2},
                                        {"out", scratch("bench_idle").string()}});
    CHECK(idle.summary["settings"][0]["mean_reward"] == 0.0);
  }
  SUBCASE("sweep rows, best setting and trace") {
    const auto dir = scratch("bench_sweep");
    const auto res = run("benchmark", {{"horizon", 500}, {"episodes", 4}, {"trace_steps", 5}, {"out", dir.string()}});
    CHECK(lines(dir / "benchmark.csv").size() == 2 + 4);
    CHECK(lines(dir / "trace.csv").size() == 2 + 4 * 5 * 9);
    double best = 0.0;
    for (const auto& s : res.summary["settings"]) best = std::max(best, s["mean_reward"].get<double>());
    CHECK(res.summary["best_mean_reward"] == best);
  }
}

TEST_CASE("rerunning an output header reproduces the file") {
  struct Case {
    std::string command;
    json overrides;
    std::string file;
  };
  const std::vector<Case> cases{
      {"decay", {{"generator", {{"n", 3}}}, {"instances", 2}, {"trials", 4}}, "decay.csv"},
      {"verify", {{"seed", 3}}, "verify.csv"},
      {"train", {{"seeds", {4}}, {"horizon", 2000}}, "metrics_seed4.csv"},
      {"benchmark", {{"horizon", 300}, {"episodes", 2}}, "benchmark.csv"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.command);
    const auto first = scratch(c.command + "_first");
    json overrides = c.overrides;
    overrides["out"] = first.string();
    run(c.command, overrides);
    const auto cfg = header_config(first / c.file);
    const auto again = scratch(c.command + "_again");
    json replay = cfg;
    replay["out"] = again.string();
    std::ostringstream log;
    run_command(resolve_config(c.command, replay), log);
    CHECK(body(first / c.file) == body(again / c.file));
  }
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(std::nan("")) == "nan");
}
