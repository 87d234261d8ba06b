// nsglb command line: run experiments, BOB sweeps, the diagnostics suite,
// and the budget / discount calculator.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nsglb/bob.hpp"
#include "nsglb/diagnostics.hpp"
#include "nsglb/envs.hpp"
#include "nsglb/harness.hpp"
#include "nsglb/policies.hpp"
#include "nsglb/rng.hpp"

using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  long seeds_override = -1;
  std::string out_override;
  long horizon_override = -1;
  bool quiet = false;
};

nsglb::ExperimentConfig load_with_overrides(const CommonFlags& flags) {
  nsglb::ExperimentConfig cfg = nsglb::load_config(flags.config_path);
  if (flags.seeds_override >= 1) {
    cfg.seeds.clear();
    for (long s = 0; s < flags.seeds_override; ++s)
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (flags.horizon_override >= 1) cfg.T = flags.horizon_override;
  if (!flags.out_override.empty()) cfg.out_dir = flags.out_override;
  return cfg;
}

int cmd_run(const CommonFlags& flags) {
  const nsglb::ExperimentConfig cfg = load_with_overrides(flags);
  const nsglb::ExperimentResult result = nsglb::run_experiment(cfg, flags.quiet);
  if (!flags.quiet)
    std::cout << "wrote " << cfg.out_dir << "/rounds.csv (" << result.rows.size()
              << " rows) and summary.json [config " << result.hash << "]\n";
  return 0;
}

int cmd_bob(const CommonFlags& flags) {
  nsglb::ExperimentConfig cfg = load_with_overrides(flags);
  cfg.bob.projection = cfg.projection;
  std::filesystem::create_directories(cfg.out_dir);

  std::vector<nsglb::RoundRecord> all_rows;
  json blocks_json = json::array();
  for (std::uint64_t seed : cfg.seeds) {
    nsglb::EnvState env(cfg.schedule(), cfg.arm_mode, cfg.K, cfg.L, cfg.link, cfg.sigma, seed,
                        cfg.seed_offset);
    const nsglb::BobRunResult run =
        nsglb::run_bob(cfg.problem(0.5), env, seed, cfg.bob);
    all_rows.insert(all_rows.end(), run.records.begin(), run.records.end());
    json seed_blocks = json::array();
    for (const nsglb::BobBlock& b : run.blocks)
      seed_blocks.push_back({{"chosen", b.chosen},
                             {"gamma", b.gamma},
                             {"reward_sum", b.reward_sum},
                             {"rounds", b.rounds},
                             {"probabilities", b.probabilities}});
    blocks_json.push_back({{"seed", seed},
                           {"H", run.H},
                           {"alpha", run.alpha},
                           {"grid", run.grid},
                           {"blocks", seed_blocks}});
    if (!flags.quiet)
      std::cout << "seed " << seed << ": final cumulative regret "
                << run.records.back().cum_regret << "\n";
  }
  nsglb::write_csv(cfg.out_dir + "/bob_rounds.csv", all_rows);
  std::ofstream out(cfg.out_dir + "/bob_summary.json");
  out << json{{"config_hash", cfg.hash}, {"runs", blocks_json}}.dump(2) << '\n';
  if (!flags.quiet) std::cout << "wrote " << cfg.out_dir << "/bob_rounds.csv\n";
  return 0;
}

int cmd_diag(const std::string& out_dir, int replications, bool quiet) {
  std::filesystem::create_directories(out_dir);
  json reports = json::array();

  {  // Confidence coverage of the tracking estimator (rotating world).
    nsglb::CoverageOptions opts;
    opts.problem.d = 2;
    opts.problem.T = 200;
    opts.problem.gamma = nsglb::tune_gamma(
        nsglb::variation_budget(nsglb::DriftSchedule::rotating_default(200)), 2, 200,
        nsglb::TuneMode::orthogonal);
    opts.replications = replications;
    const nsglb::CoverageReport rep = nsglb::check_confidence_coverage(opts);
    json r = {{"check", "confidence_coverage"},
              {"config_hash", rep.config_hash},
              {"delta", rep.delta},
              {"replications", rep.replications},
              {"checkpoints", rep.checkpoints},
              {"coverage", rep.coverage}};
    reports.push_back(r);
    if (!quiet) std::cout << "confidence_coverage: " << json(rep.coverage).dump() << "\n";
  }

  {  // Tracking dominance of the projected parameter (orthogonal arms).
    nsglb::TrackingDominanceOptions opts;
    opts.problem.d = 2;
    opts.problem.T = 300;
    opts.problem.gamma = nsglb::tune_gamma(
        nsglb::variation_budget(nsglb::DriftSchedule::rotating_default(300)), 2, 300,
        nsglb::TuneMode::orthogonal);
    opts.seeds = 3;
    const nsglb::TrackingDominanceReport rep = nsglb::check_tracking_dominance(opts);
    json r = {{"check", "tracking_dominance"},
              {"config_hash", rep.config_hash},
              {"rounds", rep.rounds},
              {"event_rounds", rep.event_rounds},
              {"fast_path_rounds", rep.fast_path_rounds},
              {"eligible_rounds", rep.eligible_rounds},
              {"satisfied", rep.satisfied},
              {"rate", rep.rate}};
    reports.push_back(r);
    if (!quiet) std::cout << "tracking_dominance rate: " << rep.rate << "\n";
  }

  {  // Estimator leaving the admissible set, split by drift phase.
    nsglb::ExperimentConfig cfg;
    cfg.env_kind = nsglb::ScheduleKind::rotating;
    cfg.T = 1500;
    cfg.d = 2;
    cfg.K = 10;
    cfg.seeds = {0, 1, 2, 3, 4};
    cfg.out_dir.clear();
    nsglb::PolicySelection sel;
    sel.kind = nsglb::PolicyKind::bvd_glm_ucb;
    sel.label = "bvd_glm_ucb";
    cfg.policies = {sel};
    cfg.hash = nsglb::config_hash(json{{"check", "outside_theta"}, {"T", cfg.T}});
    std::vector<nsglb::RoundRecord> rows;
    for (std::uint64_t seed : cfg.seeds) {
      const nsglb::RunOutput out = nsglb::run_single(cfg, sel, seed);
      rows.insert(rows.end(), out.records.begin(), out.records.end());
    }
    const nsglb::OutsideThetaReport rep = nsglb::check_outside_theta(rows, cfg.T, cfg.hash);
    json r = {{"check", "outside_theta"},
              {"config_hash", rep.config_hash},
              {"pre_drift", rep.pre_drift},
              {"drift", rep.drift},
              {"post_drift", rep.post_drift}};
    reports.push_back(r);
    if (!quiet)
      std::cout << "outside_theta frequency (pre/drift/post): " << rep.pre_drift << " / "
                << rep.drift << " / " << rep.post_drift << "\n";
  }

  {  // Deterministic potential inequalities on random trajectories.
    const std::vector<double> gammas = {0.9, 0.99, 0.999};
    int failures = 0, total = 0;
    std::mt19937_64 rng = nsglb::make_stream(7, nsglb::Stream::scratch);
    for (int rep = 0; rep < 102; ++rep) {
      const double gamma = gammas[rep % gammas.size()];
      std::vector<nsglb::Vector> arms;
      for (int t = 0; t < 500; ++t) {
        nsglb::Vector x(3);
        for (int j = 0; j < 3; ++j) x[j] = nsglb::normal01(rng);
        x *= nsglb::uniform01(rng) / std::max(x.norm(), 1e-12);
        arms.push_back(std::move(x));
      }
      const auto ell = nsglb::check_elliptical_potential(arms, gamma, 1.0, 1.0);
      const auto det = nsglb::check_determinant_trace(arms, gamma, 1.0, 1.0);
      failures += !ell.pass + !det.pass;
      total += 2;
    }
    json r = {{"check", "potential_inequalities"},
              {"config_hash", nsglb::config_hash(json{{"check", "potential"}, {"n", total}})},
              {"checks", total},
              {"failures", failures}};
    reports.push_back(r);
    if (!quiet) std::cout << "potential inequalities: " << failures << "/" << total << " failures\n";
  }

  std::ofstream out(out_dir + "/diagnostics.json");
  out << reports.dump(2) << '\n';
  if (!quiet) std::cout << "wrote " << out_dir << "/diagnostics.json\n";
  return 0;
}

int cmd_budget(const std::string& env_kind, long T, int d, double radius, bool quiet) {
  nsglb::DriftSchedule schedule;
  if (env_kind == "rotating") {
    schedule = nsglb::DriftSchedule::rotating_default(T, radius);
    d = 2;
  } else if (env_kind == "stationary") {
    nsglb::Vector th = nsglb::Vector::Zero(d);
    th[d - 1] = radius;
    schedule = nsglb::DriftSchedule::stationary(T, std::move(th));
  } else {
    std::cerr << "budget: unsupported env \"" << env_kind << "\"\n";
    return 2;
  }
  const double budget = nsglb::variation_budget(schedule);
  std::cout << "B_T = " << budget << "\n";
  if (budget > 0.0) {
    std::cout << "gamma_orthogonal = "
              << nsglb::tune_gamma(budget, d, T, nsglb::TuneMode::orthogonal) << "\n";
    std::cout << "gamma_general = " << nsglb::tune_gamma(budget, d, T, nsglb::TuneMode::general)
              << "\n";
  } else if (!quiet) {
    std::cout << "stationary schedule: no discount recommendation (B_T = 0)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-stationary generalized linear bandits"};
  app.require_subcommand(1);

  CommonFlags run_flags, bob_flags;
  std::string diag_out = "diag_out";
  int diag_replications = 200;
  bool diag_quiet = false;
  std::string budget_env = "rotating";
  long budget_T = 3000;
  int budget_d = 2;
  double budget_radius = 1.0;
  bool budget_quiet = false;

  CLI::App* run = app.add_subcommand("run", "run a policy comparison experiment");
  run->add_option("--config", run_flags.config_path, "JSON experiment config")->required();
  run->add_option("--seeds", run_flags.seeds_override, "override: use seeds 0..N-1");
  run->add_option("--out", run_flags.out_override, "override output directory");
  run->add_option("--horizon", run_flags.horizon_override, "override horizon T");
  run->add_flag("--quiet", run_flags.quiet, "suppress progress output");

  CLI::App* bob = app.add_subcommand("bob", "run the Bandit-over-Bandit sweep");
  bob->add_option("--config", bob_flags.config_path, "JSON experiment config")->required();
  bob->add_option("--seeds", bob_flags.seeds_override, "override: use seeds 0..N-1");
  bob->add_option("--out", bob_flags.out_override, "override output directory");
  bob->add_option("--horizon", bob_flags.horizon_override, "override horizon T");
  bob->add_flag("--quiet", bob_flags.quiet, "suppress progress output");

  CLI::App* diag = app.add_subcommand("diag", "run the diagnostics suite, emit JSON reports");
  diag->add_option("--out", diag_out, "output directory");
  diag->add_option("--replications", diag_replications, "coverage replications");
  diag->add_flag("--quiet", diag_quiet, "suppress progress output");

  CLI::App* budget = app.add_subcommand("budget", "print B_T and recommended discounts");
  budget->add_option("--env", budget_env, "schedule kind (rotating|stationary)");
  budget->add_option("--T", budget_T, "horizon");
  budget->add_option("--d", budget_d, "dimension");
  budget->add_option("--radius", budget_radius, "parameter radius");
  budget->add_flag("--quiet", budget_quiet, "suppress extra output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (bob->parsed()) return cmd_bob(bob_flags);
    if (diag->parsed()) return cmd_diag(diag_out, diag_replications, diag_quiet);
    if (budget->parsed())
      return cmd_budget(budget_env, budget_T, budget_d, budget_radius, budget_quiet);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    return what.find("config") != std::string::npos ? 2 : 1;
  }
  return 0;
}
