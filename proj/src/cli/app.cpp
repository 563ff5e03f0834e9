#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "privsub/cli.hpp"
#include "privsub/core.hpp"
#include "privsub/deploy.hpp"
#include "privsub/error.hpp"
#include "privsub/lvr.hpp"
#include "privsub/report.hpp"
#include "privsub/schedule.hpp"
#include "privsub/sim.hpp"

namespace privsub::cli {

namespace {

using nlohmann::json;

struct MarketOpts {
  double sigma_v = 1.0;
  double sigma_u = 1.0;
  double sigma_eps = 1.0;
  double horizon = 1.0;
  double p0 = 0.0;

  MarketParams params() const { return {sigma_v, sigma_u, sigma_eps, horizon, p0}; }
  json config() const {
    return {{"sigma-v", sigma_v}, {"sigma-u", sigma_u}, {"sigma-eps", sigma_eps}, {"horizon", horizon}, {"p0", p0}};
  }
};

// Execution settings; never echoed, so reports do not depend on them.
struct ExecOpts {
  unsigned threads = 0;
  std::string kernel = "auto";
};

struct McOpts {
  std::size_t paths = 20000;
  std::size_t steps = 2000;
  std::uint64_t seed = 20240601;
};

struct Options {
  MarketOpts market;
  ExecOpts exec;
  McOpts mc;
  std::size_t samples = 11;
  std::string convention = "post";
  std::string out_csv;
  std::size_t record_paths = 10;
  std::string schedule_file;
  std::size_t buckets = 10;
  std::optional<double> volume;
  std::string volume_mode;
  std::size_t blocks = 100;
  double delta = 1e-5;
  double delta_block = 1e-5;
  double epsilon_joint = 10.0;
  double sensitivity = 1.0;
  std::string composition = "basic";
  CpammParams amm;
};

void add_market(CLI::App* app, MarketOpts& m) {
  app->add_option("--sigma-v", m.sigma_v, "Prior std of the asset value")->capture_default_str();
  app->add_option("--sigma-u", m.sigma_u, "Noise-trader flow intensity")->capture_default_str();
  app->add_option("--sigma-eps", m.sigma_eps, "Privacy-noise intensity")->capture_default_str();
  app->add_option("--horizon", m.horizon, "Trading horizon T")->capture_default_str();
  app->add_option("--p0", m.p0, "Prior mean price")->capture_default_str();
}

void add_exec(CLI::App* app, ExecOpts& e) {
  app->add_option("--threads", e.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app->add_option("--kernel", e.kernel, "Kernel ISA: auto|scalar|avx2")->capture_default_str();
}

void add_mc(CLI::App* app, McOpts& mc, std::size_t default_paths, std::size_t default_steps, const char* steps_flag) {
  mc.paths = default_paths;
  mc.steps = default_steps;
  app->add_option("--paths", mc.paths, "Monte Carlo paths")->capture_default_str();
  app->add_option(steps_flag, mc.steps, "Time steps (blocks)")->capture_default_str();
  app->add_option("--seed", mc.seed, "Master seed")->capture_default_str();
}

json mc_config(const McOpts& mc, const char* steps_key) {
  return {{"paths", mc.paths}, {steps_key, mc.steps}, {"seed", mc.seed}};
}

json envelope(std::string command, json config, json result, json formulas, std::vector<std::string> flags = {}) {
  return {{"command", std::move(command)},
          {"version", std::string(report::kVersion)},
          {"config", std::move(config)},
          {"result", std::move(result)},
          {"formulas", std::move(formulas)},
          {"flags", std::move(flags)}};
}

json cmd_equilibrium(const Options& o) {
  const Equilibrium eq = solve_equilibrium(o.market.params());
  json cfg = o.market.config();
  cfg["samples"] = o.samples;
  return envelope("equilibrium", cfg, report::to_json(eq, o.samples), report::equilibrium_formulas());
}

json cmd_welfare(const Options& o) {
  const WelfareReport w = welfare_closed_form(o.market.params());
  return envelope("welfare", o.market.config(), report::to_json(w), report::welfare_formulas());
}

json cmd_simulate(const Options& o) {
  SimConfig cfg;
  cfg.n_steps = o.mc.steps;
  cfg.n_paths = o.mc.paths;
  cfg.master_seed = o.mc.seed;
  cfg.clearing = parse_clearing(o.convention);
  cfg.record_paths = o.out_csv.empty() ? 0 : o.record_paths;
  cfg.threads = o.exec.threads;
  cfg.isa = kernels::parse_isa(o.exec.kernel);
  cfg.insider_buckets = o.buckets;
  validate(cfg);

  std::ofstream csv_file;
  std::ostream* csv = nullptr;
  if (!o.out_csv.empty()) {
    csv_file.open(o.out_csv);
    if (!csv_file) throw ValidationError("out-csv", "cannot open " + o.out_csv);
    csv = &csv_file;
  }

  SimResult result;
  MarketParams effective = o.market.params();
  if (o.schedule_file.empty()) {
    result = simulate_paths(solve_equilibrium(effective), cfg, csv);
  } else {
    ScheduledEquilibrium eq(effective, read_schedule_csv(std::filesystem::path(o.schedule_file)));
    effective = eq.params();
    result = simulate_paths(eq, cfg, csv);
  }

  json config = o.market.config();
  config.update(mc_config(o.mc, "steps"));
  config["convention"] = o.convention;
  config["buckets"] = o.buckets;
  config["schedule"] = o.schedule_file;
  config["out-csv"] = o.out_csv;
  config["record-paths"] = o.record_paths;

  json body = report::to_json(result);
  std::vector<std::string> flags;
  if (o.mc.paths >= 2) {
    const WelfareComparison cmp = estimate_welfare(result, effective);
    body["comparison"] = report::to_json(cmp);
    flags = cmp.flags;
  }
  return envelope("simulate", config, body, report::simulation_formulas(), flags);
}

json cmd_schedule(const Options& o) {
  if (o.schedule_file.empty()) throw ValidationError("file", "a schedule CSV is required");
  const NoiseSchedule schedule = read_schedule_csv(std::filesystem::path(o.schedule_file));
  MarketParams params = o.market.params();
  const ScheduleSubsidy s = schedule_subsidy(params, schedule);
  const ScheduledEquilibrium eq(params, schedule);

  json body = report::to_json(s);
  json segments = json::array();
  for (const auto& seg : schedule.segments()) {
    segments.push_back({{"t_start", seg.t_start},
                        {"t_end", seg.t_end},
                        {"variance", seg.variance},
                        {"Sigma_at_end", eq.posterior_variance(seg.t_end)}});
  }
  body["segments"] = segments;

  json config = {{"sigma-v", o.market.sigma_v}, {"sigma-u", o.market.sigma_u}, {"horizon", o.market.horizon},
                 {"file", o.schedule_file}};
  return envelope("schedule", config, body, report::schedule_formulas());
}

json cmd_fee(const Options& o) {
  const MarketParams params = o.market.params();
  std::string mode = o.volume_mode;
  if (mode.empty()) mode = o.volume ? "given" : "mc";

  json config = o.market.config();
  config["volume-mode"] = mode;
  json body;
  std::vector<std::string> flags;
  if (mode == "given") {
    if (!o.volume) throw ValidationError("volume", "volume-mode given needs --volume");
    config["volume"] = *o.volume;
    body = report::to_json(break_even_fee(params, *o.volume));
  } else if (mode == "analytic") {
    config["blocks"] = o.mc.steps;
    body = report::to_json(break_even_fee_analytic(params, o.mc.steps));
  } else if (mode == "mc") {
    SimConfig cfg;
    cfg.n_steps = o.mc.steps;
    cfg.n_paths = o.mc.paths;
    cfg.master_seed = o.mc.seed;
    cfg.threads = o.exec.threads;
    cfg.isa = kernels::parse_isa(o.exec.kernel);
    if (cfg.n_paths < 2) throw ValidationError("paths", "volume-mode mc needs at least 2 paths");
    const SimResult sim = simulate_paths(solve_equilibrium(params), cfg);
    const FeeReport fee = break_even_fee(params, sim);
    const NetOfFeeReport net = net_of_fee_report(params, sim, fee.break_even_fee);
    config.update(mc_config(o.mc, "blocks"));
    body = report::to_json(fee);
    body["analytic_volume_Q"] = analytic_block_volume(solve_equilibrium(params), o.mc.steps);
    body["net_of_fee"] = report::to_json(net);
    flags = net.flags;
  } else {
    throw ValidationError("volume-mode", "expected given|mc|analytic, got '" + mode + "'");
  }
  return envelope("fee", config, body, report::fee_formulas(), flags);
}

json cmd_dp_inverse(const Options& o) {
  const Composition comp = parse_composition(o.composition);
  const DpInverseResult r = dp_inverse(o.epsilon_joint, o.delta, o.blocks, o.sensitivity, comp);
  json config = {{"epsilon-joint", o.epsilon_joint}, {"delta", o.delta},     {"blocks", o.blocks},
                 {"sensitivity", o.sensitivity},     {"composition", o.composition}};
  json body = report::to_json(r);
  body["composition"] = o.composition;
  return envelope("dp inverse", config, body, report::dp_formulas());
}

json cmd_dp_map(const Options& o) {
  const Composition comp = parse_composition(o.composition);
  const DeploymentPlan plan = DeploymentPlan::from_sigma_eps(o.blocks, o.market.sigma_eps, o.sensitivity);
  const DpBudget b = dp_forward(plan, o.delta_block, comp);
  json config = {{"sigma-eps", o.market.sigma_eps}, {"blocks", o.blocks},           {"delta-block", o.delta_block},
                 {"sensitivity", o.sensitivity},    {"composition", o.composition}};
  json body = report::to_json(b);
  body["plan"] = {{"n_blocks", plan.n_blocks},
                  {"per_block_noise_var", plan.per_block_noise_var},
                  {"sigma_block", plan.sigma_block()},
                  {"implied_sigma_eps", plan.implied_sigma_eps()},
                  {"sensitivity", plan.sensitivity}};
  return envelope("dp map", config, body, report::dp_formulas());
}

json amm_config(const CpammParams& a) {
  return {{"k", a.k}, {"q0", a.q0}, {"sigma", a.sigma}, {"drift", a.mu_drift}};
}

json cmd_lvr(const Options& o) {
  CpammParams amm = o.amm;
  amm.horizon_T = o.market.horizon;
  LvrSimConfig cfg;
  cfg.n_steps = o.mc.steps;
  cfg.n_paths = o.mc.paths;
  cfg.master_seed = o.mc.seed;
  cfg.threads = o.exec.threads;
  cfg.isa = kernels::parse_isa(o.exec.kernel);

  std::ofstream csv_file;
  std::ostream* csv = nullptr;
  if (!o.out_csv.empty()) {
    csv_file.open(o.out_csv);
    if (!csv_file) throw ValidationError("out-csv", "cannot open " + o.out_csv);
    csv = &csv_file;
  }
  const LvrResult r = simulate_lvr(amm, cfg, csv);

  json config = amm_config(amm);
  config["horizon"] = amm.horizon_T;
  config.update(mc_config(o.mc, "steps"));
  config["out-csv"] = o.out_csv;
  json body = report::to_json(r);
  body["rate_at_q0"] = lvr_rate(amm, amm.q0);
  std::vector<std::string> flags;
  if (r.drift_outside_comparison) flags.push_back("nonzero drift: outside the martingale comparison");
  return envelope("lvr", config, body, report::lvr_formulas(), flags);
}

json cmd_correspondence(const Options& o) {
  CpammParams amm = o.amm;
  amm.horizon_T = o.market.horizon;
  const CorrespondenceReport r = correspondence_report(o.market.params(), amm);
  json config = o.market.config();
  config.update(amm_config(amm));
  return envelope("report correspondence", config, report::to_json(r), report::correspondence_formulas());
}

// Looks for --config / --config=FILE, removes it from args and returns the file name.
std::string extract_config_path(std::vector<std::string>& args) {
  std::string path;
  for (auto it = args.begin(); it != args.end();) {
    if (*it == "--config") {
      if (it + 1 == args.end()) throw ValidationError("config", "--config needs a file name");
      path = *(it + 1);
      it = args.erase(it, it + 2);
    } else if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
      it = args.erase(it);
    } else {
      ++it;
    }
  }
  return path;
}

// Turns config-file entries into flags placed ahead of the command-line flags, so that
// explicit flags win under the take-last policy.
std::vector<std::string> inject_config(CLI::App& app, std::vector<std::string> args, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ValidationError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ValidationError("config", "top level must be an object");

  CLI::App* target = &app;
  std::size_t consumed = 0;
  while (consumed < args.size()) {
    CLI::App* sub = nullptr;
    try {
      sub = target->get_subcommand(args[consumed]);
    } catch (const CLI::OptionNotFound&) {
      sub = nullptr;
    }
    if (!sub) break;
    target = sub;
    ++consumed;
  }
  if (target == &app) return args;

  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    const CLI::Option* opt = target->get_option_no_throw("--" + key);
    if (!opt) throw ValidationError("config", "unknown key '" + key + "' for this command");
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back("--" + key);
    } else if (value.is_string()) {
      const std::string s = value.get<std::string>();
      if (s.empty()) continue;
      injected.push_back("--" + key);
      injected.push_back(s);
    } else if (value.is_number()) {
      injected.push_back("--" + key);
      injected.push_back(value.dump());
    } else if (!value.is_null()) {
      throw ValidationError("config", "unsupported value for key '" + key + "'");
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(consumed), injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& input_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Numerical laboratory for the noise-perturbed continuous-time Kyle market", "privsub"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kVersion));
  std::function<json()> handler;

  auto* eq = app.add_subcommand("equilibrium", "Solve the linear equilibrium");
  add_market(eq, o.market);
  eq->add_option("--samples", o.samples, "Number of Sigma(t) samples on [0, T]")->capture_default_str();
  eq->callback([&] { handler = [&] { return cmd_equilibrium(o); }; });

  auto* wf = app.add_subcommand("welfare", "Closed-form welfare decomposition");
  add_market(wf, o.market);
  wf->callback([&] { handler = [&] { return cmd_welfare(o); }; });

  auto* sim = app.add_subcommand("simulate", "Monte Carlo simulation of the discretised market");
  add_market(sim, o.market);
  add_mc(sim, o.mc, 20000, 2000, "--steps");
  add_exec(sim, o.exec);
  sim->add_option("--convention", o.convention, "Trade clearing: post|pre")->capture_default_str();
  sim->add_option("--out-csv", o.out_csv, "Write per-step trajectories of the leading paths");
  sim->add_option("--record-paths", o.record_paths, "Paths written to --out-csv")->capture_default_str();
  sim->add_option("--schedule", o.schedule_file, "Time-varying privacy schedule CSV (unit horizon)");
  sim->add_option("--buckets", o.buckets, "Time buckets for insider profit accrual")->capture_default_str();
  sim->callback([&] { handler = [&] { return cmd_simulate(o); }; });

  auto* sch = app.add_subcommand("schedule", "Subsidy under a time-varying privacy schedule");
  sch->add_option("--file", o.schedule_file, "Schedule CSV with header t_start,t_end,variance")->required();
  sch->add_option("--sigma-v", o.market.sigma_v)->capture_default_str();
  sch->add_option("--sigma-u", o.market.sigma_u)->capture_default_str();
  sch->add_option("--horizon", o.market.horizon)->capture_default_str();
  sch->callback([&] { handler = [&] { return cmd_schedule(o); }; });

  auto* fee = app.add_subcommand("fee", "Break-even proportional fee");
  add_market(fee, o.market);
  add_mc(fee, o.mc, 20000, 100, "--blocks");
  add_exec(fee, o.exec);
  fee->add_option("--volume", o.volume, "Expected total volume Q");
  fee->add_option("--volume-mode", o.volume_mode, "given|mc|analytic (default: given with --volume, else mc)");
  fee->callback([&] { handler = [&] { return cmd_fee(o); }; });

  auto* dp = app.add_subcommand("dp", "Gaussian-mechanism privacy accounting");
  dp->require_subcommand(1);
  auto* dp_inv = dp->add_subcommand("inverse", "Joint (epsilon, delta) budget to model sigma_eps");
  dp_inv->add_option("--epsilon-joint", o.epsilon_joint)->capture_default_str();
  dp_inv->add_option("--delta", o.delta)->capture_default_str();
  dp_inv->add_option("--blocks", o.blocks)->capture_default_str();
  dp_inv->add_option("--sensitivity", o.sensitivity)->capture_default_str();
  dp_inv->add_option("--composition", o.composition, "basic|advanced")->capture_default_str();
  dp_inv->callback([&] { handler = [&] { return cmd_dp_inverse(o); }; });
  auto* dp_map = dp->add_subcommand("map", "Model sigma_eps and block count to a composed budget");
  dp_map->add_option("--sigma-eps", o.market.sigma_eps)->capture_default_str();
  dp_map->add_option("--blocks", o.blocks)->capture_default_str();
  dp_map->add_option("--delta-block", o.delta_block)->capture_default_str();
  dp_map->add_option("--sensitivity", o.sensitivity)->capture_default_str();
  dp_map->add_option("--composition", o.composition, "basic|advanced")->capture_default_str();
  dp_map->callback([&] { handler = [&] { return cmd_dp_map(o); }; });

  auto* lvr = app.add_subcommand("lvr", "Loss-versus-rebalancing of a constant-product AMM");
  lvr->add_option("--k", o.amm.k, "Reserve product")->capture_default_str();
  lvr->add_option("--q0", o.amm.q0, "Initial reference price")->capture_default_str();
  lvr->add_option("--sigma", o.amm.sigma, "Reference-price volatility")->capture_default_str();
  lvr->add_option("--drift", o.amm.mu_drift, "GBM drift")->capture_default_str();
  lvr->add_option("--horizon", o.market.horizon)->capture_default_str();
  add_mc(lvr, o.mc, 10000, 2000, "--steps");
  add_exec(lvr, o.exec);
  lvr->add_option("--out-csv", o.out_csv, "Write per-step (t, q, V, lvr_step) of path 0");
  lvr->callback([&] { handler = [&] { return cmd_lvr(o); }; });

  auto* rep = app.add_subcommand("report", "Comparative reports");
  rep->require_subcommand(1);
  auto* corr = rep->add_subcommand("correspondence", "LVR / privacy-subsidy correspondence table");
  add_market(corr, o.market);
  corr->add_option("--k", o.amm.k)->capture_default_str();
  corr->add_option("--q0", o.amm.q0)->capture_default_str();
  corr->add_option("--sigma", o.amm.sigma)->capture_default_str();
  corr->add_option("--drift", o.amm.mu_drift)->capture_default_str();
  corr->callback([&] { handler = [&] { return cmd_correspondence(o); }; });

  try {
    std::vector<std::string> args = input_args;
    const std::string config_path = extract_config_path(args);
    if (!config_path.empty()) args = inject_config(app, std::move(args), config_path);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (!handler) throw ValidationError("command", "no command given");
    out << handler().dump(2) << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse failure is a validation error.
    return app.exit(e, out, err) == 0 ? kOk : kValidation;
  } catch (const ValidationError& e) {
    err << "error: invalid " << e.what() << '\n';
    return kValidation;
  } catch (const SimulationAbort& e) {
    err << "error: simulation aborted: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace privsub::cli
