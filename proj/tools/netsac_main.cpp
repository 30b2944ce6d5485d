#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "netsac/errors.hpp"
#include "netsac/experiments.hpp"
#include "netsac/model_io.hpp"

using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> out;
  std::optional<std::size_t> kappa;
  std::optional<std::size_t> horizon;
  bool frozen = false;
  std::optional<bool> rescale;
  std::optional<std::string> grid;
  bool print_config = false;
};

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const auto rows = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const auto cols_text = text.substr(x + 1);
    const auto cols = std::stoul(cols_text, &used);
    if (used != cols_text.size()) throw std::invalid_argument(text);
    return {rows, cols};
  } catch (const std::logic_error&) {
    throw netsac::ConfigError("--grid: expected ROWSxCOLS, got '" + text + "'");
  }
}

void apply(const std::string& command, const Overrides& o, json& cfg) {
  if (o.seed) {
    if (command == "train") cfg["seeds"] = json::array({*o.seed});
    else cfg["seed"] = *o.seed;
  }
  if (!o.seeds.empty()) cfg["seeds"] = o.seeds;
  if (o.out) cfg["out"] = *o.out;
  if (o.kappa) cfg[command == "train" ? "kappa" : "kappa_max"] = *o.kappa;
  if (o.horizon) cfg["horizon"] = *o.horizon;
  if (o.frozen) cfg["frozen_policy"] = true;
  if (o.rescale) cfg["rescale"] = *o.rescale;
  if (o.grid) {
    const auto [rows, cols] = parse_grid(*o.grid);
    if (command == "train") {
      cfg["env"]["kind"] = "wireless";
      cfg["env"]["wireless"]["rows"] = rows;
      cfg["env"]["wireless"]["cols"] = cols;
    } else if (command == "benchmark") {
      cfg["wireless"]["rows"] = rows;
      cfg["wireless"]["cols"] = cols;
    } else {
      cfg["generator"]["topology"] = "grid";
      cfg["generator"]["rows"] = rows;
      cfg["generator"]["cols"] = cols;
    }
  }
}

int run(const std::string& command, const Overrides& o) {
  try {
    json doc = o.config_path.empty() ? json::object() : netsac::read_json_document(o.config_path);
    if (doc.is_object() && doc.contains("config")) doc = doc.at("config");
    if (doc.is_object() && !doc.contains("command")) doc["command"] = command;
    json cfg = netsac::resolve_config(command, doc);
    apply(command, o, cfg);
    cfg = netsac::resolve_config(command, cfg);
    if (o.print_config) {
      std::cout << cfg.dump(2) << '\n';
      return netsac::kExitOk;
    }
    const auto result = netsac::run_command(cfg, std::cerr);
    for (const auto& f : result.files) std::cout << f.string() << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "netsac " << command << ": " << e.what() << '\n';
    return netsac::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable actor-critic for networked MDPs: decay measurement, exact checks, training and baselines"};
  app.require_subcommand(1);
  Overrides o;
  std::string chosen;

  const std::map<std::string, std::string> about{
      {"decay", "Measure how fast local Q-functions forget distant agents"},
      {"verify", "Check the truncation and critic bounds exactly on a small instance"},
      {"train", "Run the scalable actor-critic"},
      {"benchmark", "Evaluate ALOHA-style baselines on the wireless network"}};
  for (const auto& name : netsac::command_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", o.config_path, "JSON configuration file (or an earlier output carrying one)");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--print-config", o.print_config, "Print the resolved configuration and exit");
    if (name == "train") {
      sub->add_option("--seed", o.seed, "Single training seed");
      sub->add_option("--seeds", o.seeds, "Training seeds")->expected(1, -1);
      sub->add_option("--kappa", o.kappa, "Truncation radius");
      sub->add_option("--horizon", o.horizon, "Iterations per run");
      sub->add_flag("--frozen-policy", o.frozen, "Keep the policy fixed (critic only)");
      sub->add_flag("--rescale,!--no-rescale", o.rescale, "Rescale the actor step by the critic magnitude");
      sub->add_option("--grid", o.grid, "Train on the wireless network with a ROWSxCOLS user grid");
    } else {
      sub->add_option("--seed", o.seed, "Root seed");
      if (name == "benchmark") {
        sub->add_option("--horizon", o.horizon, "Steps per evaluation episode");
        sub->add_option("--grid", o.grid, "User grid ROWSxCOLS");
      } else {
        sub->add_option("--kappa", o.kappa, "Largest radius examined");
        sub->add_option("--grid", o.grid, "Generate grid instances ROWSxCOLS");
      }
    }
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? netsac::kExitOk : netsac::kExitConfig;
  }
  return run(chosen, o);
}
