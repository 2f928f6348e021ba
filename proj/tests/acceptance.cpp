// Acceptance suite: exercises every gate end to end through the CLI code
// path, printing one PASS/FAIL line per criterion. Exit code is the number
// of failed criteria. Expects the configs directory as argv[1].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "asizer/checkpoint.hpp"
#include "asizer/cli.hpp"
#include "asizer/config.hpp"
#include "asizer/eval.hpp"

namespace fs = std::filesystem;
using namespace asizer;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& name, double budget_seconds,
                   const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_seconds > 0.0 && secs > budget_seconds) {
    out.pass = false;
    out.detail += " [exceeded " + fmt_double(budget_seconds) + " s budget]";
  }
  std::printf("[%d] %s %s (%.1f s) %s\n", id, out.pass ? "PASS" : "FAIL", name.c_str(), secs,
              out.detail.c_str());
  std::fflush(stdout);
  if (!out.pass) ++g_failures;
}

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text != nullptr) *out_text = out.str();
  if (code != 0) {
    std::fprintf(stderr, "  cli exited %d: %s%s\n", code, out.str().c_str(), err.str().c_str());
  }
  return code;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p.string())); }

bool files_equal(const fs::path& a, const fs::path& b) {
  return read_file(a.string()) == read_file(b.string());
}

fs::path g_work;
fs::path g_configs;

std::string stage_config(const std::string& name) {
  // copy so the calibrate verb can rewrite without touching the repo
  const fs::path src = g_configs / name;
  const fs::path dst = g_work / name;
  write_file(dst.string(), read_file(src.string()));
  return dst.string();
}

// ---- criterion bodies ----

Outcome engine_oracles() {
  std::ostringstream detail;
  bool ok = true;

  {  // divider exact
    const std::vector<Component> net = {Component::resistor(2, 1, 1000.0),
                                        Component::resistor(1, 0, 1000.0)};
    const double err = std::abs(solve_ac(net, 3, {2, 1, InputKind::Voltage}, 50.0) - cplx(0.5, 0.0));
    ok = ok && err < 1e-12;
    detail << "divider_err=" << fmt_double(err);
  }
  {  // RC f3db within 0.5%
    const std::vector<Component> net = {Component::resistor(1, 2, 1000.0),
                                        Component::capacitor(2, 0, 1e-9)};
    const FrequencyResponse fr =
        frequency_sweep(net, 3, {1, 2, InputKind::Voltage}, 1.0, 1e9, 20);
    const double expected = 1.0 / (2.0 * M_PI * 1000.0 * 1e-9);
    const double rel = std::abs(measure_f3db(fr) - expected) / expected;
    ok = ok && rel < 0.005;
    detail << " rc_rel=" << fmt_double(rel);
  }
  {  // single-pole PM within 0.2 deg
    FrequencyResponse fr;
    fr.node_count = 2;
    fr.freqs = log_grid(1.0, 1e8, 20);
    for (double f : fr.freqs) fr.h.push_back(100.0 / cplx(1.0, f / 1000.0));
    const double pm = measure_phase_margin(fr);
    const double expected = 180.0 - std::atan(std::sqrt(100.0 * 100.0 - 1.0)) * 180.0 / M_PI;
    ok = ok && std::abs(pm - expected) < 0.2;
    detail << " pm=" << fmt_double(pm);
  }
  {  // white-noise integral within 1%
    std::vector<std::pair<double, double>> psd;
    for (double f = 0.0; f <= 1.05e9; f += 5e7) psd.push_back({f, 4e-18});
    const double v = integrate_input_noise(psd, 0.0, 1e9);
    const double rel = std::abs(v - std::sqrt(4e-9)) / std::sqrt(4e-9);
    ok = ok && rel < 0.01;
    detail << " noise_rel=" << fmt_double(rel);
  }
  return {ok, detail.str()};
}

Outcome reward_suite() {
  const RewardConfig cfg;
  bool ok = true;
  std::ostringstream detail;

  const std::vector<SpecDef> ge = {{"s", "", SpecSense::HardGe}};
  const std::vector<SpecDef> mini = {{"s", "", SpecSense::Minimize}};
  const std::vector<SpecDef> mixed = {{"a", "", SpecSense::HardGe},
                                      {"b", "", SpecSense::HardLe},
                                      {"c", "", SpecSense::Minimize}};

  ok = ok && compute_r({{5.0, 2.0, 3.0}, true}, {5.0, 2.0, 3.0}, mixed, cfg) == 0.0;
  ok = ok && std::abs(compute_r({{1.0 / 3.0}, true}, {1.0}, ge, cfg) - (-0.5)) < 1e-15;
  ok = ok && std::abs(compute_r({{0.5}, true}, {1.0}, mini, cfg) - (0.05 / 3.0)) < 1e-15;

  const RewardOut a = compute_reward(0.0, cfg);
  const RewardOut b = compute_reward(-0.5, cfg);
  const RewardOut c = compute_reward(0.02, cfg);
  ok = ok && a.reward == 10.0 && a.success;
  ok = ok && b.reward == -0.5 && !b.success;
  ok = ok && c.reward == 10.02 && c.success;

  Rng rng(12);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    SpecVector o{{rng.uniform(0.1, 9.0), rng.uniform(0.1, 9.0), rng.uniform(0.1, 9.0)}, true};
    TargetSpec t{rng.uniform(0.1, 9.0), rng.uniform(0.1, 9.0), rng.uniform(0.1, 9.0)};
    const double base = compute_r(o, t, mixed, cfg);
    const int k = static_cast<int>(rng.below(3));
    const double scale = std::exp(rng.uniform(-2.0, 2.0));
    o.values[static_cast<std::size_t>(k)] *= scale;
    t[static_cast<std::size_t>(k)] *= scale;
    worst = std::max(worst, std::abs(compute_r(o, t, mixed, cfg) - base));
  }
  ok = ok && worst < 1e-12;
  detail << "scale_fuzz_worst=" << fmt_double(worst);
  return {ok, detail.str()};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PolicyNet net(3 + static_cast<int>(seed % 3), 1 + static_cast<int>(seed % 2), {5, 4});
    net.init(seed);
    Rng rng(seed * 101 + 3);
    Batch batch = make_gradcheck_batch(net, 10, rng, seed % 2 == 0);
    worst = std::max(worst, max_gradient_rel_error(net, batch, TrainConfig{}));
  }
  return {worst < 1e-4, "max_rel_err=" + fmt_double(worst)};
}

Outcome dummy_convergence() {
  const std::string cfg_path = stage_config("dummy.json");
  bool ok = true;
  std::ostringstream detail;
  for (int s = 0; s < 3; ++s) {
    const fs::path out = g_work / ("dummy_seed" + std::to_string(s));
    const int code = cli({"train", "--config", cfg_path, "--seed", std::to_string(5 + s),
                          "--out", out.string()});
    std::uint64_t steps = 0;
    bool reached = code == 0;
    if (reached) {
      // last curve row = total env steps at stop
      const std::string curve = read_file((out / "curve.csv").string());
      std::istringstream in(curve);
      std::string line, last;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (!line.empty()) last = line;
      }
      steps = std::stoull(last.substr(0, last.find(',')));
      reached = steps < 5000;
    }
    ok = ok && reached;
    detail << "seed" << 5 + s << "=" << (reached ? "ok" : "no") << "@" << steps << " ";
  }
  return {ok, detail.str()};
}

std::string g_opamp_checkpoint;  // first converged seed, reused downstream

Outcome opamp_training() {
  const std::string cfg_path = stage_config("opamp.json");
  const RunConfig cfg = load_config(cfg_path);
  int converged = 0;
  std::ostringstream detail;
  for (int s = 0; s < 3; ++s) {
    const fs::path out = g_work / ("opamp_seed" + std::to_string(s));
    const std::uint64_t seed = cfg.train.seed + static_cast<std::uint64_t>(s);
    const int code = cli({"train", "--config", cfg_path, "--seed", std::to_string(seed), "--out",
                          out.string()});
    if (code == 0) {
      ++converged;
      if (g_opamp_checkpoint.empty()) {
        g_opamp_checkpoint = (out / "checkpoint.json").string();
      }
    }
    detail << "seed" << seed << "=" << (code == 0 ? "converged" : "no") << " ";
  }
  return {converged >= 2, detail.str()};
}

Outcome generalization() {
  bool ok = true;
  std::ostringstream detail;

  if (g_opamp_checkpoint.empty()) return {false, "no converged op-amp checkpoint"};
  const std::string opamp_cfg = stage_config("opamp.json");
  const fs::path opamp_out = g_work / "opamp_deploy";
  ok = cli({"deploy", "--config", opamp_cfg, "--checkpoint", g_opamp_checkpoint, "--targets",
            "200", "--out", opamp_out.string()}) == 0;
  if (ok) {
    const auto s = read_json(opamp_out / "deploy_summary.json");
    const double gen = s.at("generalization").get<double>();
    const double steps = s.at("mean_steps_over_reached").get<double>();
    ok = gen >= 0.90 && steps <= 30.0;
    detail << "opamp=" << s.at("reached").get<int>() << "/200 steps=" << fmt_double(steps);
  }

  const std::string tia_cfg = stage_config("tia.json");
  const fs::path tia_train = g_work / "tia_train";
  bool tia_ok = cli({"train", "--config", tia_cfg, "--out", tia_train.string()}) == 0;
  if (tia_ok) {
    const fs::path tia_out = g_work / "tia_deploy";
    tia_ok = cli({"deploy", "--config", tia_cfg, "--checkpoint",
                  (tia_train / "checkpoint.json").string(), "--targets", "200", "--out",
                  tia_out.string()}) == 0;
    if (tia_ok) {
      const auto s = read_json(tia_out / "deploy_summary.json");
      tia_ok = s.at("generalization").get<double>() >= 0.90;
      detail << " tia=" << s.at("reached").get<int>() << "/200";
    }
  }
  return {ok && tia_ok, detail.str()};
}

Outcome sample_efficiency() {
  if (g_opamp_checkpoint.empty()) return {false, "no converged op-amp checkpoint"};
  const std::string cfg_path = stage_config("opamp.json");
  const fs::path out = g_work / "efficiency";
  const std::string seed = "424242";

  bool ok = cli({"deploy", "--config", cfg_path, "--checkpoint", g_opamp_checkpoint, "--targets",
                 "50", "--seed", seed, "--out", out.string()}) == 0;
  ok = ok && cli({"ga", "--config", cfg_path, "--targets", "50", "--seed", seed, "--out",
                  out.string()}) == 0;
  ok = ok && cli({"random", "--config", cfg_path, "--targets", "50", "--seed", seed, "--out",
                  out.string()}) == 0;
  ok = ok && cli({"compare", "--config", cfg_path, "--rl", (out / "deploy.csv").string(), "--ga",
                  (out / "ga.csv").string(), "--random", (out / "random.csv").string(), "--out",
                  out.string()}) == 0;
  if (!ok) return {false, "pipeline failed"};

  // compare.csv: method,mean_sims_to_success,reached,total,generalization,speedup_vs_rl
  double speedup = 0.0, random_rate = 1.0;
  std::istringstream in(read_file((out / "compare.csv").string()));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells[0] == "rl" && cells.size() > 5 && !cells[5].empty()) speedup = std::stod(cells[5]);
    if (cells[0] == "random") random_rate = std::stod(cells[4]);
  }
  std::ostringstream detail;
  detail << "speedup=" << fmt_double(speedup) << "x random_rate=" << fmt_double(random_rate);
  return {speedup >= 10.0 && random_rate < 0.20, detail.str()};
}

Outcome transfer() {
  if (g_opamp_checkpoint.empty()) return {false, "no converged op-amp checkpoint"};
  const std::string cfg_path = stage_config("opamp.json");
  const fs::path out = g_work / "transfer";
  const bool ran = cli({"transfer", "--config", cfg_path, "--checkpoint", g_opamp_checkpoint,
                        "--targets", "40", "--out", out.string()}) == 0;
  if (!ran) return {false, "transfer verb failed"};
  const auto s = read_json(out / "transfer_summary.json");
  const int reached = s.at("reached").get<int>();
  const double steps = s.at("mean_steps_over_reached").get<double>();
  const double clean_steps = s.at("clean_mean_steps_over_reached").get<double>();
  const bool unchanged = s.at("params_unchanged").get<bool>();
  std::ostringstream detail;
  detail << "reached=" << reached << "/40 steps=" << fmt_double(steps)
         << " clean_steps=" << fmt_double(clean_steps) << " params_unchanged=" << unchanged;
  const bool ok = reached >= 30 && steps <= 30.0 && unchanged && steps >= clean_steps;
  return {ok, detail.str()};
}

Outcome determinism() {
  bool ok = true;
  std::ostringstream detail;

  // calibrate twice on separate copies
  const std::string c1 = stage_config("dummy.json");
  fs::copy_file(c1, g_work / "dummy2.json", fs::copy_options::overwrite_existing);
  const std::string c2 = (g_work / "dummy2.json").string();
  ok = ok && cli({"calibrate", "--config", c1, "--samples", "400", "--seed", "9"}) == 0;
  ok = ok && cli({"calibrate", "--config", c2, "--samples", "400", "--seed", "9"}) == 0;
  ok = ok && files_equal(c1, c2);
  detail << "calibrate=" << (ok ? "ok" : "diff");

  const fs::path r1 = g_work / "det1";
  const fs::path r2 = g_work / "det2";
  auto rerun = [&](const std::vector<std::string>& extra, const std::string& artifact) {
    std::vector<std::string> a1 = extra;
    a1.push_back("--out");
    a1.push_back(r1.string());
    std::vector<std::string> a2 = extra;
    a2.push_back("--out");
    a2.push_back(r2.string());
    bool pass = cli(a1) == 0 && cli(a2) == 0 && files_equal(r1 / artifact, r2 / artifact);
    ok = ok && pass;
    detail << " " << extra[0] << "=" << (pass ? "ok" : "diff");
  };

  rerun({"train", "--config", c1}, "checkpoint.json");
  const std::string ck = (r1 / "checkpoint.json").string();
  rerun({"deploy", "--config", c1, "--checkpoint", ck, "--targets", "30"}, "deploy.csv");
  rerun({"ga", "--config", c1, "--targets", "5"}, "ga.csv");
  rerun({"random", "--config", c1, "--targets", "20"}, "random.csv");
  rerun({"compare", "--config", c1, "--rl", (r1 / "deploy.csv").string(), "--ga",
         (r1 / "ga.csv").string()},
        "compare.csv");

  if (!g_opamp_checkpoint.empty()) {
    const std::string op_cfg = stage_config("opamp.json");
    rerun({"transfer", "--config", op_cfg, "--checkpoint", g_opamp_checkpoint, "--targets", "6"},
          "transfer.csv");
  }

  std::string s1, s2;
  ok = ok && cli({"selftest"}, &s1) == 0 && cli({"selftest"}, &s2) == 0 && s1 == s2;
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  g_configs = argc > 1 ? fs::path(argv[1]) : fs::path("configs");
  g_work = fs::current_path() / "acceptance_runs";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  std::printf("acceptance suite: configs from %s, scratch in %s\n", g_configs.string().c_str(),
              g_work.string().c_str());

  run_criterion(1, "engine-oracles", 1.0, engine_oracles);
  run_criterion(2, "reward-unit-suite", 0.0, reward_suite);
  run_criterion(3, "ppo-gradient-check", 30.0, gradient_check);
  run_criterion(4, "toy-env-convergence", 60.0, dummy_convergence);
  run_criterion(5, "opamp-training", 0.0, opamp_training);
  run_criterion(6, "generalization", 0.0, generalization);
  run_criterion(7, "sample-efficiency", 0.0, sample_efficiency);
  run_criterion(8, "transfer", 0.0, transfer);
  run_criterion(9, "determinism", 0.0, determinism);

  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures;
}
