#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asizer/checkpoint.hpp"
#include "asizer/config.hpp"
#include "asizer/eval.hpp"
#include "asizer/ga.hpp"
#include "asizer/version.hpp"

namespace asizer {

// Exit codes: 0 success, 1 usage/internal error, 2 config error,
// 3 fingerprint mismatch, 4 selftest failure, 5 training did not converge.
enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitFingerprint = 3,
  kExitSelftest = 4,
  kExitNoConverge = 5,
};

// Published comparison points for the two benchmark circuits, printed next
// to measured results by the compare verb.
struct ReferenceNumbers {
  double rl_sims = 0.0;
  double ga_sims = 0.0;
  double generalization = 0.0;
};

inline ReferenceNumbers reference_numbers(CircuitId id) {
  switch (id) {
    case CircuitId::Tia: return {15.0, 376.0, 487.0 / 500.0};
    case CircuitId::Opamp: return {27.0, 1063.0, 963.0 / 1000.0};
    default: return {};
  }
}

namespace cli_detail {

namespace fs = std::filesystem;

struct Paths {
  fs::path out_dir;

  fs::path file(const std::string& name) const { return out_dir / name; }
};

inline Paths prepare_out_dir(const RunConfig& cfg, const std::string& override_dir) {
  Paths p;
  p.out_dir = override_dir.empty() ? fs::path(cfg.output_dir) : fs::path(override_dir);
  fs::create_directories(p.out_dir);
  return p;
}

inline void write_manifest(const Paths& paths, const std::string& verb, const RunConfig& cfg,
                           std::uint64_t seed, int workers,
                           const std::vector<std::string>& artifacts) {
  nlohmann::json j;
  j["verb"] = verb;
  j["version"] = kVersion;
  j["config_hash"] = hex64(config_hash(cfg));
  j["seed"] = seed;
  if (workers >= 0) j["workers"] = workers;
  j["artifacts"] = artifacts;
  write_file(paths.file("manifest_" + verb + ".json").string(), j.dump(2) + "\n");
}

inline nlohmann::json summary_json(const DeploymentReport& rep, int horizon) {
  nlohmann::json j;
  j["targets"] = rep.total;
  j["reached"] = rep.reached;
  j["generalization"] = rep.generalization;
  j["mean_steps_over_reached"] = rep.mean_steps_over_reached;
  j["mean_sims_over_reached"] = rep.mean_sims_over_reached;
  j["horizon"] = horizon;
  return j;
}

// Minimal CSV reader for the numeric reports this tool writes itself.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw ConfigError("CSV is missing column '" + name + "'");
  }
};

inline Csv parse_csv(const std::string& path) {
  const std::string text = read_file(path);
  Csv csv;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      csv.header = std::move(cells);
      first = false;
    } else {
      csv.rows.push_back(std::move(cells));
    }
  }
  if (first) throw ConfigError("empty CSV: " + path);
  return csv;
}

}  // namespace cli_detail

// ---- selftest: quick analytic oracles, independent of config files ----

struct SelftestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::vector<SelftestCase> run_selftest() {
  std::vector<SelftestCase> cases;

  {  // resistive divider
    SelftestCase c{"divider_gain"};
    const std::vector<Component> net = {Component::resistor(2, 1, 1000.0),
                                        Component::resistor(1, 0, 1000.0)};
    const cplx h = solve_ac(net, 3, {2, 1, InputKind::Voltage}, 1000.0);
    const double err = std::abs(h - cplx(0.5, 0.0));
    c.passed = err < 1e-12;
    c.detail = "|h - 0.5| = " + fmt_double(err);
    cases.push_back(c);
  }
  {  // RC low-pass -3 dB frequency
    SelftestCase c{"rc_f3db"};
    const double r = 1000.0, cap = 1e-9;
    const std::vector<Component> net = {Component::resistor(1, 2, r),
                                        Component::capacitor(2, 0, cap)};
    const FrequencyResponse fr =
        frequency_sweep(net, 3, {1, 2, InputKind::Voltage}, 1.0, 1.0e9, 20);
    const double measured = measure_f3db(fr);
    const double expected = 1.0 / (2.0 * M_PI * r * cap);
    const double rel = std::abs(measured - expected) / expected;
    c.passed = rel < 0.005;
    c.detail = "rel err = " + fmt_double(rel);
    cases.push_back(c);
  }
  {  // single-pole phase margin
    SelftestCase c{"single_pole_pm"};
    FrequencyResponse fr;
    fr.node_count = 2;
    fr.freqs = log_grid(1.0, 1.0e8, 20);
    fr.h.resize(fr.freqs.size());
    const double a0 = 100.0, p1 = 1000.0;
    for (std::size_t i = 0; i < fr.freqs.size(); ++i) {
      fr.h[i] = a0 / cplx(1.0, fr.freqs[i] / p1);
    }
    const double pm = measure_phase_margin(fr);
    const double expected = 180.0 - std::atan(std::sqrt(a0 * a0 - 1.0)) * 180.0 / M_PI;
    c.passed = std::abs(pm - expected) < 0.2;
    c.detail = "pm = " + fmt_double(pm) + ", expected " + fmt_double(expected);
    cases.push_back(c);
  }
  {  // PPO gradient vs central finite differences
    SelftestCase c{"ppo_gradient"};
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      PolicyNet net(4, 2, {6, 5});
      net.init(seed);
      Rng rng(seed + 100);
      Batch batch = make_gradcheck_batch(net, 12, rng);
      worst = std::max(worst, max_gradient_rel_error(net, batch, TrainConfig{}));
    }
    c.passed = worst < 1e-4;
    c.detail = "max rel err = " + fmt_double(worst);
    cases.push_back(c);
  }
  return cases;
}

// ---- verb implementations ----

namespace cli_detail {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string checkpoint_path;
  std::string rl_csv, ga_csv, random_csv;
  std::string sweep_pops;
  int targets = -1;
  int samples = 10000;
  long seed = -1;
  int workers = -1;
  bool stochastic = false;
};

inline int do_calibrate(const CliOptions& opt, std::ostream& out) {
  RunConfig cfg = load_config(opt.config_path);
  const auto circuit = make_circuit(cfg);
  const std::uint64_t seed = opt.seed >= 0 ? static_cast<std::uint64_t>(opt.seed) : 1;
  const CalibrationResult cal = calibrate_ranges(*circuit, opt.samples, seed);
  cfg.calibrated = cal.ranges;
  write_file(opt.config_path, serialize_config(cfg));

  const Paths paths = prepare_out_dir(cfg, opt.out_dir);
  write_manifest(paths, "calibrate", cfg, seed, -1, {});

  out << "calibrated " << circuit->name() << " over " << cal.samples << " samples ("
      << cal.infeasible << " infeasible)\n";
  const auto& defs = circuit->spec_defs();
  for (std::size_t i = 0; i < defs.size(); ++i) {
    out << "  " << defs[i].name << ": [" << fmt_double(cal.ranges[i].lo) << ", "
        << fmt_double(cal.ranges[i].hi) << "] " << defs[i].unit << "\n";
  }
  return kExitOk;
}

inline int do_train(const CliOptions& opt, std::ostream& out) {
  RunConfig cfg = load_config(opt.config_path);
  if (opt.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(opt.seed);
  if (opt.workers > 0) cfg.train.workers = opt.workers;

  const auto circuit = make_circuit(cfg);
  const EnvConfig env_cfg = make_env_config(cfg, false);
  try {
    env_cfg.validate(*circuit);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  Rng target_rng(cfg.target_seed);
  const std::vector<TargetSpec> targets =
      sample_targets(cfg.active_ranges(), cfg.train_targets, target_rng);

  PolicyNet net(2 * circuit->num_specs() + circuit->num_params(), circuit->num_params());
  net.init(cfg.train.seed);

  const TrainResult result = train(net, *circuit, env_cfg, targets, cfg.train, &out);

  Checkpoint ck;
  ck.fingerprint = make_fingerprint(cfg, false);
  ck.train = cfg.train;
  ck.net = std::move(net);

  const Paths paths = prepare_out_dir(cfg, opt.out_dir);
  save_checkpoint(paths.file("checkpoint.json").string(), ck);
  write_file(paths.file("curve.csv").string(), curve_csv(result.curve));
  write_manifest(paths, "train", cfg, cfg.train.seed, cfg.train.workers,
                 {"checkpoint.json", "curve.csv"});

  out << (result.reached ? "converged" : "did not converge") << " after " << result.env_steps
      << " env steps\n";
  return result.reached ? kExitOk : kExitNoConverge;
}

inline int do_deploy(const CliOptions& opt, bool transfer_mode, std::ostream& out) {
  RunConfig cfg = load_config(opt.config_path);
  if (transfer_mode && !cfg.parasitics.active()) {
    throw ConfigError("transfer requires an active parasitics block (scale > 0)");
  }
  const auto circuit = make_circuit(cfg);

  const Checkpoint ck = load_checkpoint(opt.checkpoint_path);
  check_fingerprint(ck.fingerprint, make_fingerprint(cfg, transfer_mode), transfer_mode);
  if (ck.net.in_dim() != 2 * circuit->num_specs() + circuit->num_params()) {
    throw FingerprintError("checkpoint network width does not fit this circuit");
  }

  const std::uint64_t seed =
      opt.seed >= 0 ? static_cast<std::uint64_t>(opt.seed) : cfg.deploy_seed;
  const int n_targets = opt.targets > 0 ? opt.targets : (transfer_mode ? 40 : 200);
  Rng target_rng(seed);
  const std::vector<TargetSpec> targets =
      sample_targets(cfg.active_ranges(), n_targets, target_rng);

  DeployOptions dopt;
  dopt.stochastic = opt.stochastic;
  dopt.seed = seed + 1;
  dopt.workers = opt.workers > 0 ? opt.workers : cfg.train.workers;

  const EnvConfig env_cfg = make_env_config(cfg, transfer_mode);
  const std::uint64_t theta_before = fnv1a64(ck.net.theta.data(),
                                             ck.net.theta.size() * sizeof(double));
  const DeploymentReport rep = deploy(ck.net, *circuit, env_cfg, targets, dopt);
  const bool unchanged =
      fnv1a64(ck.net.theta.data(), ck.net.theta.size() * sizeof(double)) == theta_before;

  const std::string verb = transfer_mode ? "transfer" : "deploy";
  const Paths paths = prepare_out_dir(cfg, opt.out_dir);
  std::vector<std::string> artifacts = {verb + ".csv", verb + "_summary.json"};
  write_file(paths.file(verb + ".csv").string(), deployment_csv(rep, circuit->spec_defs()));

  nlohmann::json summary = summary_json(rep, cfg.horizon);
  if (transfer_mode) {
    summary["params_unchanged"] = unchanged;
    // clean-environment reference on the same targets
    const DeploymentReport clean =
        deploy(ck.net, *circuit, make_env_config(cfg, false), targets, dopt);
    summary["clean_reached"] = clean.reached;
    summary["clean_mean_steps_over_reached"] = clean.mean_steps_over_reached;

    std::vector<std::vector<int>> reached_points;
    for (const TargetResult& t : rep.per_target) {
      if (t.reached) reached_points.push_back(t.final_x);
    }
    const auto deltas = spec_delta_histogram(reached_points, *circuit, cfg.parasitics);
    write_file(paths.file("transfer_deltas.csv").string(),
               spec_delta_csv(deltas, circuit->spec_defs()));
    artifacts.push_back("transfer_deltas.csv");
  }
  write_file(paths.file(verb + "_summary.json").string(), summary.dump(2) + "\n");
  write_manifest(paths, verb, cfg, seed, dopt.workers, artifacts);

  out << verb << ": reached " << rep.reached << "/" << rep.total << " targets, mean steps "
      << fmt_double(rep.mean_steps_over_reached) << "\n";
  return kExitOk;
}

inline int do_ga(const CliOptions& opt, std::ostream& out) {
  RunConfig cfg = load_config(opt.config_path);
  const auto circuit = make_circuit(cfg);

  const std::uint64_t seed =
      opt.seed >= 0 ? static_cast<std::uint64_t>(opt.seed) : cfg.deploy_seed;
  const int n_targets = opt.targets > 0 ? opt.targets : 50;
  Rng target_rng(seed);
  const std::vector<TargetSpec> targets =
      sample_targets(cfg.active_ranges(), n_targets, target_rng);

  std::vector<int> populations;
  if (!opt.sweep_pops.empty()) {
    std::istringstream ss(opt.sweep_pops);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const int p = std::stoi(tok);
      if (p < 4) throw ConfigError("sweep population sizes must be at least 4");
      populations.push_back(p);
    }
  } else {
    populations.push_back(cfg.ga.population);
  }

  const Paths paths = prepare_out_dir(cfg, opt.out_dir);
  std::vector<std::string> artifacts;

  std::vector<GaResult> best_results;
  int best_pop = 0;
  double best_mean = 0.0;
  int best_reached = -1;
  std::ostringstream sweep_csv;
  sweep_csv << "population,reached,total,mean_evals_over_reached\n";

  for (const int pop : populations) {
    std::vector<GaResult> results;
    results.reserve(targets.size());
    double evals = 0.0;
    int reached = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      GaConfig g = cfg.ga;
      g.population = pop;
      g.seed = cfg.ga.seed + i;
      results.push_back(ga_optimize(*circuit, targets[i], cfg.reward, g));
      if (results.back().success) {
        ++reached;
        evals += static_cast<double>(results.back().eval_count);
      }
    }
    const double mean = reached > 0 ? evals / reached : 0.0;
    sweep_csv << pop << "," << reached << "," << targets.size() << "," << fmt_double(mean)
              << "\n";
    out << "population " << pop << ": reached " << reached << "/" << targets.size()
        << ", mean evals " << fmt_double(mean) << "\n";
    if (reached > best_reached || (reached == best_reached && mean < best_mean)) {
      best_reached = reached;
      best_mean = mean;
      best_pop = pop;
      best_results = std::move(results);
    }
  }

  write_file(paths.file("ga.csv").string(), ga_csv(best_results, targets, circuit->spec_defs()));
  artifacts.push_back("ga.csv");
  if (populations.size() > 1) {
    write_file(paths.file("ga_sweep.csv").string(), sweep_csv.str());
    artifacts.push_back("ga_sweep.csv");
    out << "best population: " << best_pop << "\n";
  }
  write_manifest(paths, "ga", cfg, seed, -1, artifacts);
  return kExitOk;
}

inline int do_random(const CliOptions& opt, std::ostream& out) {
  RunConfig cfg = load_config(opt.config_path);
  const auto circuit = make_circuit(cfg);

  const std::uint64_t seed =
      opt.seed >= 0 ? static_cast<std::uint64_t>(opt.seed) : cfg.deploy_seed;
  const int n_targets = opt.targets > 0 ? opt.targets : 200;
  Rng target_rng(seed);
  const std::vector<TargetSpec> targets =
      sample_targets(cfg.active_ranges(), n_targets, target_rng);

  SizingEnv env(*circuit, make_env_config(cfg, false));
  Rng action_rng(seed, 1);
  const RandomAgentResult res = random_agent_deploy(env, targets, action_rng);

  const Paths paths = prepare_out_dir(cfg, opt.out_dir);
  write_file(paths.file("random.csv").string(),
             random_agent_csv(res, targets, circuit->spec_defs()));
  write_manifest(paths, "random", cfg, seed, -1, {"random.csv"});

  out << "random agent: reached " << res.reached << "/" << res.total << " targets\n";
  return kExitOk;
}

inline int do_compare(const CliOptions& opt, std::ostream& out) {
  RunConfig cfg = load_config(opt.config_path);
  const auto circuit = make_circuit(cfg);
  const auto& defs = circuit->spec_defs();

  const Csv rl = parse_csv(opt.rl_csv);
  const Csv ga = parse_csv(opt.ga_csv);

  auto target_cells = [&defs](const Csv& csv, std::size_t row) {
    std::vector<std::string> cells;
    for (const SpecDef& d : defs) {
      cells.push_back(csv.rows[row][static_cast<std::size_t>(csv.column("target_" + d.name))]);
    }
    return cells;
  };

  if (rl.rows.size() != ga.rows.size()) {
    throw ConfigError("compare: RL and GA reports cover different target counts");
  }
  for (std::size_t i = 0; i < rl.rows.size(); ++i) {
    if (target_cells(rl, i) != target_cells(ga, i)) {
      throw ConfigError("compare: RL and GA reports cover different target sets");
    }
  }

  DeploymentReport rl_rep;
  const int col_reached = rl.column("reached");
  const int col_steps = rl.column("steps");
  for (const auto& row : rl.rows) {
    TargetResult t;
    t.reached = row[static_cast<std::size_t>(col_reached)] == "1";
    t.steps = std::stoi(row[static_cast<std::size_t>(col_steps)]);
    t.sims = t.steps + 1;
    rl_rep.per_target.push_back(std::move(t));
  }
  aggregate_report(rl_rep);

  std::vector<GaResult> ga_results;
  const int col_success = ga.column("success");
  const int col_evals = ga.column("evals");
  for (const auto& row : ga.rows) {
    GaResult g;
    g.success = row[static_cast<std::size_t>(col_success)] == "1";
    g.eval_count = std::stol(row[static_cast<std::size_t>(col_evals)]);
    ga_results.push_back(g);
  }

  RandomAgentResult random_res;
  const RandomAgentResult* random_ptr = nullptr;
  if (!opt.random_csv.empty()) {
    const Csv rnd = parse_csv(opt.random_csv);
    if (rnd.rows.size() != rl.rows.size()) {
      throw ConfigError("compare: random-agent report covers a different target count");
    }
    for (std::size_t i = 0; i < rnd.rows.size(); ++i) {
      if (target_cells(rnd, i) != target_cells(rl, i)) {
        throw ConfigError("compare: random-agent report covers a different target set");
      }
    }
    const int rc = rnd.column("reached");
    const int rs = rnd.column("steps");
    for (const auto& row : rnd.rows) {
      random_res.per_target.push_back(row[static_cast<std::size_t>(rc)] == "1" ? 1 : 0);
      random_res.steps.push_back(std::stoi(row[static_cast<std::size_t>(rs)]));
      if (random_res.per_target.back()) ++random_res.reached;
    }
    random_res.total = static_cast<int>(rnd.rows.size());
    random_ptr = &random_res;
  }

  const ComparisonTable table = compare(rl_rep, ga_results, random_ptr);
  const Paths paths = prepare_out_dir(cfg, opt.out_dir);
  write_file(paths.file("compare.csv").string(), comparison_csv(table));
  write_manifest(paths, "compare", cfg, 0, -1, {"compare.csv"});

  out << "method       mean sims   generalization\n";
  for (const ComparisonRow& r : table.rows) {
    out << r.method << std::string(r.method.size() < 12 ? 12 - r.method.size() : 1, ' ')
        << fmt_double(r.mean_sims) << "   " << r.reached << "/" << r.total << "\n";
  }
  out << "speedup vs GA: " << fmt_double(table.speedup) << "x\n";
  const ReferenceNumbers ref = reference_numbers(cfg.circuit);
  if (ref.rl_sims > 0.0) {
    out << "reference points for this circuit: rl " << fmt_double(ref.rl_sims) << " sims, ga "
        << fmt_double(ref.ga_sims) << " sims, generalization "
        << fmt_double(ref.generalization) << "\n";
  }
  return kExitOk;
}

}  // namespace cli_detail

// Entry point shared by the binary and the test harness. `args` excludes the
// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"config-driven sizing experiments: analytical circuit environments, "
               "a PPO policy, and baselines"};
  app.require_subcommand(1);

  cli_detail::CliOptions opt;

  auto add_common = [&opt](CLI::App* sub, bool needs_config = true) {
    if (needs_config) {
      sub->add_option("--config", opt.config_path, "run config file (JSON)")->required();
    }
    sub->add_option("--out", opt.out_dir, "output directory (default: config output_dir)");
  };

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "write percentile spec ranges back into the config file");
  add_common(calibrate);
  calibrate->add_option("--samples", opt.samples, "random parameter points to simulate");
  calibrate->add_option("--seed", opt.seed, "sampling seed");

  CLI::App* train = app.add_subcommand("train", "train a policy; writes checkpoint and curve");
  add_common(train);
  train->add_option("--seed", opt.seed, "overrides train.seed");
  train->add_option("--workers", opt.workers, "overrides train.workers");

  CLI::App* deploy = app.add_subcommand("deploy", "run a trained policy on fresh targets");
  add_common(deploy);
  deploy->add_option("--checkpoint", opt.checkpoint_path, "checkpoint file")->required();
  deploy->add_option("--targets", opt.targets, "number of targets (default 200)");
  deploy->add_option("--seed", opt.seed, "target sampling seed (default seeds.deploy_seed)");
  deploy->add_option("--workers", opt.workers, "parallel episodes (greedy mode only)");
  deploy->add_flag("--stochastic", opt.stochastic, "sample actions instead of argmax");

  CLI::App* transfer = app.add_subcommand(
      "transfer", "deploy a clean-trained policy on the parasitic environment");
  add_common(transfer);
  transfer->add_option("--checkpoint", opt.checkpoint_path, "checkpoint file")->required();
  transfer->add_option("--targets", opt.targets, "number of targets (default 40)");
  transfer->add_option("--seed", opt.seed, "target sampling seed (default seeds.deploy_seed)");
  transfer->add_option("--workers", opt.workers, "parallel episodes (greedy mode only)");
  transfer->add_flag("--stochastic", opt.stochastic, "sample actions instead of argmax");

  CLI::App* ga = app.add_subcommand("ga", "genetic-algorithm baseline on fresh targets");
  add_common(ga);
  ga->add_option("--targets", opt.targets, "number of targets (default 50)");
  ga->add_option("--seed", opt.seed, "target sampling seed (default seeds.deploy_seed)");
  ga->add_option("--sweep-pop", opt.sweep_pops,
                 "comma-separated population sizes; reports the best");

  CLI::App* random_cmd = app.add_subcommand("random", "random-agent baseline on fresh targets");
  add_common(random_cmd);
  random_cmd->add_option("--targets", opt.targets, "number of targets (default 200)");
  random_cmd->add_option("--seed", opt.seed, "target sampling seed (default seeds.deploy_seed)");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "merge RL/GA/random reports into one table");
  add_common(compare_cmd);
  compare_cmd->add_option("--rl", opt.rl_csv, "deploy.csv from the deploy verb")->required();
  compare_cmd->add_option("--ga", opt.ga_csv, "ga.csv from the ga verb")->required();
  compare_cmd->add_option("--random", opt.random_csv, "random.csv from the random verb");

  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in analytic oracles");
  (void)selftest;

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (calibrate->parsed()) return cli_detail::do_calibrate(opt, out);
    if (train->parsed()) return cli_detail::do_train(opt, out);
    if (deploy->parsed()) return cli_detail::do_deploy(opt, false, out);
    if (transfer->parsed()) return cli_detail::do_deploy(opt, true, out);
    if (ga->parsed()) return cli_detail::do_ga(opt, out);
    if (random_cmd->parsed()) return cli_detail::do_random(opt, out);
    if (compare_cmd->parsed()) return cli_detail::do_compare(opt, out);
    if (selftest->parsed()) {
      bool all_ok = true;
      for (const SelftestCase& c : run_selftest()) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        all_ok = all_ok && c.passed;
      }
      return all_ok ? kExitOk : kExitSelftest;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FingerprintError& e) {
    err << "fingerprint mismatch: " << e.what() << "\n";
    return kExitFingerprint;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "no verb given\n";
  return kExitUsage;
}

}  // namespace asizer
