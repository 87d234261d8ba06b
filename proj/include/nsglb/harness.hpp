#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nsglb/bob.hpp"
#include "nsglb/config.hpp"
#include "nsglb/envs.hpp"
#include "nsglb/policies.hpp"
#include "nsglb/records.hpp"

namespace nsglb {

struct PolicySelection {
  PolicyKind kind = PolicyKind::bvd_glm_ucb;
  std::optional<double> gamma;  // explicit discount; otherwise tuned from B_T
  TuneMode tune_mode = TuneMode::orthogonal;
  std::string label;            // CSV algo column; defaults to the kind name
};

// Parsed and validated experiment description (JSON file, strict schema:
// unknown keys are rejected).
struct ExperimentConfig {
  // env section
  ScheduleKind env_kind = ScheduleKind::rotating;
  long T = 3000;
  int d = 2;
  int K = 10;
  ArmMode arm_mode = ArmMode::random_sphere;
  LinkKind link = LinkKind::logistic;
  std::uint64_t seed_offset = 0;
  double radius = 1.0;                                   // rotating
  Vector theta_fixed;                                    // stationary
  std::vector<std::pair<long, Vector>> segments;         // piecewise_constant

  // problem scalars
  double S = 1.0, L = 1.0, sigma = 0.5, lambda = 1.0, delta = 0.1;

  // policies / solver / bob
  std::vector<PolicySelection> policies;
  ProjectionOptions projection;
  BobOptions bob;

  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  std::string hash;  // canonical-JSON FNV-1a hash of the file contents

  DriftSchedule schedule() const;
  ProblemConfig problem(double gamma) const;
  // explicit gamma validated into (0,1); otherwise tuned from the schedule's
  // variation budget (gamma -> 1-1e-6 when the budget is zero).
  double resolve_gamma(const PolicySelection& sel) const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j);

// FNV-1a 64 over the canonical (sorted-key) JSON dump, hex string.
std::string config_hash(const nlohmann::json& j);

struct RunOutput {
  std::vector<RoundRecord> records;
  long projection_calls = 0;
  long fast_path_count = 0;
  long invariant_violations = 0;
};

// One deterministic (seed, policy) run on a fresh environment stream.
// Within a seed every policy replays identical arm sets and reward uniforms.
RunOutput run_single(const ExperimentConfig& config, const PolicySelection& sel,
                     std::uint64_t seed);

struct PolicySummary {
  std::string name;
  std::vector<double> mean_cum_regret;  // at the checkpoints
  std::vector<double> std_cum_regret;   // sample std across seeds
};

struct ExperimentResult {
  std::vector<RoundRecord> rows;        // canonical order: seed-major, then policy
  std::vector<long> checkpoints;        // T/4, T/2, 3T/4, T
  std::vector<PolicySummary> summaries;
  std::map<std::string, RunOutput> per_run_stats;  // "seed/policy" -> stats (records cleared)
  std::string hash;
};

// Runs every (seed, policy) pair on a bounded worker pool
// (NONSTAT_GLB_THREADS caps the width), then writes rounds.csv and
// summary.json under out_dir (unless out_dir is empty). Output order is
// canonical regardless of completion order.
ExperimentResult run_experiment(const ExperimentConfig& config, bool quiet = true);

nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace nsglb
