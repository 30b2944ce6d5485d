#include "netsac/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "netsac/actor_critic.hpp"
#include "netsac/decay.hpp"
#include "netsac/errors.hpp"
#include "netsac/interaction.hpp"
#include "netsac/model_io.hpp"
#include "netsac/oracle.hpp"
#include "netsac/random_instance.hpp"
#include "netsac/wireless.hpp"

namespace netsac {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Output helpers

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const fs::path& path, const json& config, const std::vector<std::string>& columns) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw ConfigError("cannot write " + path.string());
  out_ << "# config: " << config.dump() << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::operator<<(double v) {
  separator();
  out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::size_t v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Config access

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": unexpected value " + obj.at(key).dump());
  }
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& where, std::size_t min = 0) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
    throw ConfigError(where + "." + key + ": expected an integer >= " + std::to_string(min) + ", got " + v.dump());
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": seeds are nonnegative integers, got " + v.dump());
  }
  return v.get<std::uint64_t>();
}

double get_probability(const json& obj, const std::string& key, const std::string& where) {
  const double v = get<double>(obj, key, where);
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(where + "." + key + " must lie in [0, 1]");
  return v;
}

json merge(const json& defaults, const json& doc, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object, got " + doc.dump());
  json out = defaults;
  for (const auto& [key, value] : doc.items()) {
    if (!defaults.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    const json& d = defaults.at(key);
    out[key] = (d.is_object() && !value.is_null()) ? merge(d, value, where + "." + key) : value;
  }
  return out;
}

json generator_defaults(std::size_t n, std::size_t actions, double coupling) {
  return {{"topology", "line"}, {"n", n},  {"rows", 2}, {"cols", 3}, {"state_count", 2}, {"action_count", actions},
          {"coupling", coupling}};
}

json wireless_defaults() {
  return {{"rows", 3}, {"cols", 3}, {"deadline", 2}, {"arrival", json::array()}, {"success", json::array()}, {"seed", 0}};
}

json schedule_defaults() { return {{"alpha0", 1.0}, {"alpha_exp", 0.75}, {"eta0", 5.0}, {"eta_exp", 0.99}}; }

RandomInstanceConfig parse_generator(const json& g) {
  const std::string where = "generator";
  RandomInstanceConfig cfg;
  cfg.topology = parse_topology(get<std::string>(g, "topology", where));
  cfg.n = get_count(g, "n", where, 1);
  cfg.rows = get_count(g, "rows", where, 1);
  cfg.cols = get_count(g, "cols", where, 1);
  cfg.state_count = get_count(g, "state_count", where, 1);
  cfg.action_count = get_count(g, "action_count", where, 1);
  cfg.coupling = get_probability(g, "coupling", where);
  return cfg;
}

WirelessConfig parse_wireless(const json& w) {
  const std::string where = "wireless";
  WirelessConfig cfg;
  cfg.rows = get_count(w, "rows", where, 1);
  cfg.cols = get_count(w, "cols", where, 1);
  cfg.deadline = get_count(w, "deadline", where, 1);
  cfg.arrival = get<std::vector<double>>(w, "arrival", where);
  cfg.success = get<std::vector<double>>(w, "success", where);
  cfg.seed = get_seed(w, "seed", where);
  return cfg;
}

StepSchedule parse_schedule(const json& s) {
  const std::string where = "schedule";
  StepSchedule out{get<double>(s, "alpha0", where), get<double>(s, "alpha_exp", where), get<double>(s, "eta0", where),
                   get<double>(s, "eta_exp", where)};
  out.validate();
  return out;
}

void refuse_wireless(const json& config, const std::string& command) {
  if (!config.at("wireless").is_null()) {
    throw ModelClassError(command +
                          ": the wireless environment's transitions depend on neighbor actions, outside the "
                          "factored model class the exact oracle evaluates");
  }
}

// A model file (plus optional policy file) or a generated instance.
struct LoadedInstance {
  FactoredMdp mdp;
  SoftmaxPolicy policy;
};

LoadedInstance load_or_generate(const json& config, std::uint64_t seed) {
  if (!config.at("model").is_null()) {
    auto mdp = load_mdp(get<std::string>(config, "model", "config"));
    SoftmaxPolicy policy = config.at("policy").is_null()
                               ? SoftmaxPolicy(mdp.spaces())
                               : load_policy(get<std::string>(config, "policy", "config"), mdp.spaces());
    return {std::move(mdp), std::move(policy)};
  }
  auto inst = random_instance(parse_generator(config.at("generator")), seed);
  if (!config.at("policy").is_null()) {
    inst.policy = load_policy(get<std::string>(config, "policy", "config"), inst.mdp.spaces());
  }
  return {std::move(inst.mdp), std::move(inst.policy)};
}

std::vector<double> lift(const LocalProjection& proj, std::span<const double> table, std::size_t size) {
  std::vector<double> out(size);
  for (std::size_t z = 0; z < size; ++z) out[z] = table[proj.project(z)];
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double table_distance(const GradientTables& a, const GradientTables& b, AgentId i) {
  double sq = 0.0;
  for (std::size_t k = 0; k < a[i].size(); ++k) sq += (a[i][k] - b[i][k]) * (a[i][k] - b[i][k]);
  return std::sqrt(sq);
}

// ---------------------------------------------------------------------------
// decay

CommandResult cmd_decay(const json& config, std::ostream& log) {
  refuse_wireless(config, "decay");
  const std::string where = "decay";
  const std::uint64_t seed = get_seed(config, "seed", where);
  const bool from_model = !config.at("model").is_null();
  const std::size_t instances = from_model ? 1 : get_count(config, "instances", where, 1);
  const std::size_t trials = get_count(config, "trials", where, 1);
  const AgentId agent = get_count(config, "agent", where);
  const fs::path out_dir = get<std::string>(config, "out", where);

  CommandResult result;
  CsvWriter csv(out_dir / "decay.csv", config, {"instance", "kappa", "trial", "value"});
  result.files.push_back(out_dir / "decay.csv");

  json per_instance = json::array();
  std::size_t rate_below_one = 0, condition_met = 0, nonincreasing = 0;
  bool all_finite = true;
  for (std::size_t k = 0; k < instances; ++k) {
    const std::uint64_t instance_seed = seed + k;
    const auto inst = load_or_generate(config, instance_seed);
    if (agent >= inst.mdp.agent_count()) throw ConfigError("decay.agent: no such agent");
    const std::size_t kappa_max = config.at("kappa_max").is_null() ? inst.mdp.graph().eccentricity(agent)
                                                                     : get_count(config, "kappa_max", where);
    const auto c = interaction_matrix(inst.mdp);
    OracleOptions opts;
    opts.q_agents = {agent};
    const ExactOracle oracle(inst.mdp, inst.policy, opts);
    Rng rng = Rng::stream(instance_seed, "evaluation");
    const auto profile = decay_profile(oracle, agent, kappa_max, trials, rng);
    for (std::size_t kappa = 0; kappa <= kappa_max; ++kappa)
      for (std::size_t t = 0; t < trials; ++t) {
        const double v = profile.values[kappa][t];
        all_finite = all_finite && std::isfinite(v);
        csv << k << kappa << t << v;
        csv.end_row();
      }
    std::vector<double> p10, p90;
    for (std::size_t kappa = 0; kappa <= kappa_max; ++kappa) {
      p10.push_back(profile.percentile(kappa, 10));
      p90.push_back(profile.percentile(kappa, 90));
    }
    const auto medians = profile.medians();
    const auto fit = fit_exponential(medians);
    const bool monotone = std::is_sorted(medians.rbegin(), medians.rend());
    rate_below_one += fit.rate < 1.0;
    if (c.condition_met()) {
      ++condition_met;
      nonincreasing += monotone;
    }
    per_instance.push_back({{"instance", k},
                            {"seed", instance_seed},
                            {"rho_bound", c.rho_bound},
                            {"condition_met", c.condition_met()},
                            {"median", medians},
                            {"p10", p10},
                            {"p90", p90},
                            {"median_nonincreasing", monotone},
                            {"fit_rate", fit.rate},
                            {"fit_scale", fit.scale},
                            {"fit_points", fit.points}});
    log << "decay: instance " << k << " rho_bound=" << format_number(c.rho_bound)
        << " fit_rate=" << format_number(fit.rate) << '\n';
  }
  result.summary = {{"config", config},
                    {"instances", per_instance},
                    {"aggregate",
                     {{"instances", instances},
                      {"fit_rate_below_one", rate_below_one},
                      {"fraction_fit_rate_below_one", static_cast<double>(rate_below_one) / instances},
                      {"condition_met", condition_met},
                      {"condition_met_nonincreasing", nonincreasing},
                      {"all_finite", all_finite}}}};
  write_json(out_dir / "decay_summary.json", result.summary);
  result.files.push_back(out_dir / "decay_summary.json");
  result.exit_code = all_finite ? kExitOk : kExitNumerical;
  return result;
}

// ---------------------------------------------------------------------------
// verify

CommandResult cmd_verify(const json& config, std::ostream& log) {
  refuse_wireless(config, "verify");
  const std::string where = "verify";
  const std::uint64_t seed = get_seed(config, "seed", where);
  const double gamma = get<double>(config, "gamma", where);
  const double slack = get<double>(config, "slack", where);
  const fs::path out_dir = get<std::string>(config, "out", where);
  const auto inst = load_or_generate(config, seed);
  const auto& mdp = inst.mdp;
  const std::size_t n = mdp.agent_count();
  const std::size_t kappa_max =
      config.at("kappa_max").is_null() ? mdp.graph().diameter() : get_count(config, "kappa_max", where);

  const auto c = interaction_matrix(mdp);
  const ExactOracle oracle(mdp, inst.policy);
  const double rho = c.rho_bound;
  const bool applicable = c.condition_met();
  const double r_max = mdp.r_max();
  const double scale = applicable ? r_max / (1.0 - rho) : std::numeric_limits<double>::quiet_NaN();
  const double mu_d = oracle.mixing_norm();
  const auto exact_grad = oracle.exact_policy_gradient();
  const std::size_t m = oracle.chain().size();

  CommandResult result;
  CsvWriter csv(out_dir / "verify.csv", config, {"agent", "kappa", "check", "bound", "measured", "status"});
  result.files.push_back(out_dir / "verify.csv");
  std::size_t checks = 0, failures = 0;
  json failed = json::array();
  auto record = [&](AgentId i, std::size_t kappa, const std::string& name, double bound, double measured,
                    bool bounded, double tolerance) {
    std::string status = "n/a";
    if (bounded) {
      ++checks;
      const bool ok = measured <= bound + tolerance;
      status = ok ? "pass" : "fail";
      if (!ok) {
        ++failures;
        failed.push_back({{"agent", i}, {"kappa", kappa}, {"check", name}, {"bound", bound}, {"measured", measured}});
      }
    }
    csv << i << kappa << name << bound << measured << status;
    csv.end_row();
  };

  std::vector<std::vector<double>> discounted(n);
  for (AgentId i = 0; i < n; ++i) discounted[i] = oracle.discounted_q(i, gamma);

  for (std::size_t kappa = 0; kappa <= kappa_max; ++kappa) {
    const double geo = std::pow(rho, static_cast<double>(kappa + 1));
    const auto approx_cond = oracle.approx_policy_gradient(kappa, WeightScheme::ConditionalStationary);
    const auto approx_unif = oracle.approx_policy_gradient(kappa, WeightScheme::Uniform);
    for (AgentId i = 0; i < n; ++i) {
      const auto proj = oracle.projection(i, kappa);
      const auto q = oracle.local_q(i);
      const double q_bound = scale * geo;
      record(i, kappa, "q_decay", q_bound, perturbation_gap(proj, q), applicable, slack);
      record(i, kappa, "truncated_q_conditional", q_bound,
             max_abs_diff(q, lift(proj, oracle.truncated_q(i, kappa, WeightScheme::ConditionalStationary), m)),
             applicable, slack);
      record(i, kappa, "truncated_q_uniform", q_bound,
             max_abs_diff(q, lift(proj, oracle.truncated_q(i, kappa, WeightScheme::Uniform), m)), applicable, slack);
      const double g_bound = scale * kSoftmaxScoreBound * geo;
      record(i, kappa, "approx_gradient_conditional", g_bound, table_distance(approx_cond, exact_grad, i), applicable, slack);
      record(i, kappa, "approx_gradient_uniform", g_bound, table_distance(approx_unif, exact_grad, i), applicable, slack);
      const double gr = gamma * rho;
      const double disc_bound = applicable ? r_max / (1.0 - gr) * std::pow(gr, static_cast<double>(kappa + 1))
                                           : std::numeric_limits<double>::quiet_NaN();
      record(i, kappa, "discounted_decay", disc_bound, perturbation_gap(proj, discounted[i]), applicable, slack);
      const auto fp = oracle.critic_fixed_point(i, kappa);
      record(i, kappa, "critic_fixed_point", scale * geo / (1.0 - mu_d), oracle.critic_fixed_point_error(i, kappa, fp),
             applicable, slack);
      record(i, kappa, "critic_average", 1e-10, std::abs(fp.mu_hat - oracle.average_reward().per_agent[i]), true, 0.0);
    }
  }
  json matrix = json::array();
  for (AgentId i = 0; i < n; ++i) {
    std::vector<double> row(c.c.begin() + static_cast<std::ptrdiff_t>(i * n),
                            c.c.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    matrix.push_back(row);
  }
  const std::string status = failures == 0 ? (applicable ? "pass" : "condition not met") : "fail";
  result.summary = {{"config", config},
                    {"rho_bound", rho},
                    {"condition_met", applicable},
                    {"interaction_matrix", matrix},
                    {"row_sums", c.row_sums},
                    {"mixing_norm", mu_d},
                    {"min_stationary", oracle.min_stationary()},
                    {"objective", oracle.average_reward().total},
                    {"per_agent_objective", oracle.average_reward().per_agent},
                    {"checks", checks},
                    {"failures", failures},
                    {"failed", failed},
                    {"status", status}};
  write_json(out_dir / "verify_report.json", result.summary);
  result.files.push_back(out_dir / "verify_report.json");
  log << "verify: rho_bound=" << format_number(rho) << " checks=" << checks << " failures=" << failures
      << " status=" << status << '\n';
  result.exit_code = failures == 0 ? kExitOk : kExitCheckFailed;
  return result;
}

// ---------------------------------------------------------------------------
// train

struct TrainingSetup {
  std::unique_ptr<NetworkedEnv> env;
  std::optional<FactoredMdp> mdp;  // present when the exact oracle applies
  SoftmaxPolicy initial;
};

TrainingSetup build_training_env(const json& env_cfg) {
  const std::string where = "env";
  const auto kind = get<std::string>(env_cfg, "kind", where);
  const json& init = env_cfg.at("initial_policy");
  TrainingSetup setup;
  if (kind == "wireless") {
    auto env = std::make_unique<WirelessEnv>(parse_wireless(env_cfg.at("wireless")));
    setup.initial = SoftmaxPolicy(env->spaces());
    if (init.is_string() && init != "uniform") {
      setup.initial = load_policy(init.get<std::string>(), env->spaces());
    }
    setup.env = std::move(env);
    return setup;
  }
  if (kind == "random") {
    auto inst = random_instance(parse_generator(env_cfg.at("generator")), get_seed(env_cfg, "seed", where));
    setup.initial = inst.policy;
    setup.mdp = std::move(inst.mdp);
  } else if (kind == "model") {
    if (env_cfg.at("model").is_null()) throw ConfigError("env.model: a model file is required for kind 'model'");
    setup.mdp = load_mdp(get<std::string>(env_cfg, "model", where));
    setup.initial = SoftmaxPolicy(setup.mdp->spaces());
  } else {
    throw ConfigError("env.kind: expected random, model or wireless, got '" + kind + "'");
  }
  if (!init.is_string()) throw ConfigError("env.initial_policy: expected a string");
  const auto init_name = init.get<std::string>();
  if (init_name == "uniform") {
    setup.initial = SoftmaxPolicy(setup.mdp->spaces());
  } else if (init_name == "instance") {
    if (kind != "random") throw ConfigError("env.initial_policy 'instance' needs kind 'random'");
  } else {
    setup.initial = load_policy(init_name, setup.mdp->spaces());
  }
  setup.env = std::make_unique<MdpEnvironment>(*setup.mdp);
  return setup;
}

CommandResult cmd_train(const json& config, std::ostream& log) {
  const std::string where = "train";
  const fs::path out_dir = get<std::string>(config, "out", where);
  const auto seeds = get<std::vector<std::uint64_t>>(config, "seeds", where);
  if (seeds.empty()) throw ConfigError("train.seeds: at least one seed is required");
  TrainerConfig base;
  base.kappa = get_count(config, "kappa", where);
  base.horizon = get_count(config, "horizon", where, 1);
  base.schedule = parse_schedule(config.at("schedule"));
  base.rescale = get<bool>(config, "rescale", where);
  base.cadence = get_count(config, "cadence", where, 1);
  base.oracle_every = get_count(config, "oracle_every", where);
  base.window = get_count(config, "window", where, 1);
  const bool frozen = get<bool>(config, "frozen_policy", where);
  if (frozen) base.schedule.eta0 = 0.0;

  const auto setup = build_training_env(config.at("env"));
  if (base.oracle_every > 0 && !setup.mdp) {
    throw ModelClassError("train.oracle_every: exact evaluation is unavailable for the wireless environment");
  }
  if (base.kappa > setup.env->graph().diameter()) {
    log << "train: kappa exceeds the graph diameter; neighborhoods cover the whole network\n";
  }

  OracleHook hook;
  if (setup.mdp && (base.oracle_every > 0)) {
    const FactoredMdp& mdp = *setup.mdp;
    hook = [&mdp](const SoftmaxPolicy& p) {
      const ExactOracle o(mdp, p);
      return OracleSample{o.average_reward().total, norm(o.exact_policy_gradient())};
    };
  }

  CommandResult result;
  json runs = json::array();
  std::vector<double> terminal;
  for (const std::uint64_t seed : seeds) {
    TrainerConfig tc = base;
    tc.seed = seed;
    const auto run = run_actor_critic(*setup.env, setup.initial, tc, hook);
    const std::string stem = "seed" + std::to_string(seed);

    std::vector<std::string> columns{"step", "mean_reward", "mean_mu_hat"};
    if (hook) {
      columns.push_back("J_exact");
      columns.push_back("grad_norm");
    }
    const fs::path metrics_path = out_dir / ("metrics_" + stem + ".csv");
    {
      CsvWriter csv(metrics_path, config, columns);
      for (const auto& row : run.metrics.rows) {
        csv << row.step << row.mean_reward << row.mean_mu_hat;
        if (hook) csv << row.objective << row.grad_norm;
        csv.end_row();
      }
    }
    result.files.push_back(metrics_path);

    json policy_doc = policy_to_json(run.policy);
    policy_doc["config"] = config;
    const fs::path policy_path = out_dir / ("policy_" + stem + ".json");
    write_json(policy_path, policy_doc);
    result.files.push_back(policy_path);

    json entry = {{"seed", seed}, {"terminal_reward", run.metrics.terminal_reward}, {"q_sup", run.metrics.q_sup},
                  {"mu_hat", run.critic.mu_hat}};
    if (run.metrics.initial) {
      entry["J_initial"] = number_or_null(run.metrics.initial->objective);
      entry["grad_norm_initial"] = number_or_null(run.metrics.initial->grad_norm);
    }
    if (run.metrics.final) {
      entry["J_final"] = number_or_null(run.metrics.final->objective);
      entry["grad_norm_final"] = number_or_null(run.metrics.final->grad_norm);
    }
    if (frozen && setup.mdp) {
      // Distance of the learned critic from the fixed point of its recursion.
      const ExactOracle oracle(*setup.mdp, setup.initial);
      json tracking = json::array();
      double worst = 0.0;
      for (AgentId i = 0; i < setup.mdp->agent_count(); ++i) {
        const auto fp = oracle.critic_fixed_point(i, base.kappa, run.critic.q[i].dummy());
        const double d = max_abs_diff(run.critic.q[i].values(), fp.q_hat);
        worst = std::max(worst, d);
        tracking.push_back({{"agent", i},
                            {"linf", d},
                            {"mu_error", std::abs(run.critic.mu_hat[i] - fp.mu_hat)}});
      }
      entry["critic_tracking"] = tracking;
      entry["critic_linf"] = worst;
    }
    runs.push_back(entry);
    terminal.push_back(run.metrics.terminal_reward);
    log << "train: seed " << seed << " terminal_reward=" << format_number(run.metrics.terminal_reward) << '\n';
  }
  const double mean = std::accumulate(terminal.begin(), terminal.end(), 0.0) / static_cast<double>(terminal.size());
  double var = 0.0;
  for (double v : terminal) var += (v - mean) * (v - mean);
  const double sd = terminal.size() > 1 ? std::sqrt(var / static_cast<double>(terminal.size() - 1)) : 0.0;
  result.summary = {{"config", config}, {"runs", runs}, {"terminal_reward_mean", mean}, {"terminal_reward_std", sd}};
  write_json(out_dir / "train_summary.json", result.summary);
  result.files.push_back(out_dir / "train_summary.json");
  return result;
}

// ---------------------------------------------------------------------------
// benchmark

std::string state_bits(Index state, std::size_t deadline) {
  std::string bits;
  for (std::size_t m = 0; m < deadline; ++m) bits.push_back((state >> m) & 1 ? '1' : '0');
  return bits;
}

CommandResult cmd_benchmark(const json& config, std::ostream& log) {
  const std::string where = "benchmark";
  const fs::path out_dir = get<std::string>(config, "out", where);
  const std::uint64_t seed = get_seed(config, "seed", where);
  const auto sweep = get<std::vector<double>>(config, "p_send", where);
  const std::size_t episodes = get_count(config, "episodes", where, 1);
  const std::size_t horizon = get_count(config, "horizon", where, 1);
  const std::size_t trace_steps = get_count(config, "trace_steps", where);
  if (sweep.empty()) throw ConfigError("benchmark.p_send: at least one setting is required");
  const WirelessEnv env(parse_wireless(config.at("wireless")));
  const std::size_t n = env.user_count();

  CommandResult result;
  CsvWriter csv(out_dir / "benchmark.csv", config, {"p_send", "mean_reward", "std_error"});
  result.files.push_back(out_dir / "benchmark.csv");
  std::optional<CsvWriter> trace;
  if (trace_steps > 0) {
    trace.emplace(out_dir / "trace.csv", config,
                  std::vector<std::string>{"p_send", "step", "user", "state", "action", "reward"});
    result.files.push_back(out_dir / "trace.csv");
  }

  json settings = json::array();
  double best = -1.0, best_p = 0.0;
  JointState next(n);
  JointAction a(n);
  std::vector<double> rewards(n);
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const AlohaPolicy aloha(env, sweep[k]);
    Rng rng = Rng::stream(seed, "evaluation", k);
    std::vector<double> episode_means;
    for (std::size_t e = 0; e < episodes; ++e) {
      JointState s = env.initial_state(rng);
      double total = 0.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        for (AgentId i = 0; i < n; ++i) a[i] = aloha.sample(i, rng);
        env.step(s, a, rng, next, rewards);
        if (trace && e == 0 && t < trace_steps) {
          for (AgentId i = 0; i < n; ++i) {
            *trace << sweep[k] << t << i << state_bits(s[i], env.deadline()) << a[i] << rewards[i];
            trace->end_row();
          }
        }
        for (double r : rewards) total += r;
        s.swap(next);
      }
      episode_means.push_back(total / static_cast<double>(horizon * n));
    }
    const double mean =
        std::accumulate(episode_means.begin(), episode_means.end(), 0.0) / static_cast<double>(episodes);
    double var = 0.0;
    for (double v : episode_means) var += (v - mean) * (v - mean);
    const double se = episodes > 1 ? std::sqrt(var / static_cast<double>(episodes - 1) / static_cast<double>(episodes))
                                    : 0.0;
    csv << sweep[k] << mean << se;
    csv.end_row();
    settings.push_back({{"p_send", sweep[k]}, {"mean_reward", mean}, {"std_error", se}});
    if (mean > best) {
      best = mean;
      best_p = sweep[k];
    }
    log << "benchmark: p_send=" << format_number(sweep[k]) << " mean_reward=" << format_number(mean) << '\n';
  }
  result.summary = {{"config", config},
                    {"settings", settings},
                    {"best_p_send", best_p},
                    {"best_mean_reward", best},
                    {"arrival", env.arrival()},
                    {"success", env.success()}};
  write_json(out_dir / "benchmark_summary.json", result.summary);
  result.files.push_back(out_dir / "benchmark_summary.json");
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ModelClassError*>(&e)) return kExitModelClass;
  if (dynamic_cast<const SizeGuardError*>(&e)) return kExitSizeGuard;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return kExitConfig;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"decay", "verify", "train", "benchmark"};
  return names;
}

json default_config(const std::string& command) {
  if (command == "decay") {
    return {{"command", "decay"},   {"out", "out/decay"},  {"seed", 0},          {"instances", 100},
            {"trials", 100},        {"agent", 0},          {"kappa_max", nullptr}, {"generator", generator_defaults(6, 3, 1.0)},
            {"model", nullptr},     {"policy", nullptr},   {"wireless", nullptr}};
  }
  if (command == "verify") {
    return {{"command", "verify"}, {"out", "out/verify"}, {"seed", 0},         {"kappa_max", nullptr},
            {"gamma", 0.9},        {"slack", 1e-9},       {"generator", generator_defaults(3, 2, 0.3)},
            {"model", nullptr},    {"policy", nullptr},   {"wireless", nullptr}};
  }
  if (command == "train") {
    return {{"command", "train"},
            {"out", "out/train"},
            {"seeds", json::array({0})},
            {"kappa", 1},
            {"horizon", 200000},
            {"schedule", schedule_defaults()},
            {"rescale", false},
            {"frozen_policy", false},
            {"cadence", 100},
            {"oracle_every", 0},
            {"window", 10000},
            {"env",
             {{"kind", "random"},
              {"seed", 0},
              {"generator", generator_defaults(3, 2, 0.3)},
              {"model", nullptr},
              {"initial_policy", "uniform"},
              {"wireless", wireless_defaults()}}}};
  }
  if (command == "benchmark") {
    return {{"command", "benchmark"},
            {"out", "out/benchmark"},
            {"seed", 0},
            {"p_send", {0.2, 0.4, 0.6, 0.8}},
            {"episodes", 20},
            {"horizon", 10000},
            {"trace_steps", 0},
            {"wireless", wireless_defaults()}};
  }
  throw ConfigError("unknown command '" + command + "' (expected decay, verify, train or benchmark)");
}

json resolve_config(const std::string& command, const json& doc) {
  const json* body = &doc;
  if (doc.is_object() && doc.contains("config") && doc.at("config").is_object()) body = &doc.at("config");
  if (body->is_null()) return default_config(command);
  json resolved = merge(default_config(command), *body, command);
  if (resolved.at("command") != command) {
    throw ConfigError("config was written for '" + resolved.at("command").get<std::string>() + "', not '" +
                      command + "'");
  }
  return resolved;
}

CommandResult run_command(const json& config, std::ostream& log) {
  const auto command = get<std::string>(config, "command", "config");
  if (command == "decay") return cmd_decay(config, log);
  if (command == "verify") return cmd_verify(config, log);
  if (command == "train") return cmd_train(config, log);
  if (command == "benchmark") return cmd_benchmark(config, log);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace netsac
