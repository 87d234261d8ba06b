#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsglb/config.hpp"
#include "nsglb/envs.hpp"
#include "nsglb/projection.hpp"
#include "nsglb/records.hpp"
#include "nsglb/types.hpp"

namespace nsglb {

// Numeric verification of the computable concentration / potential results,
// with oracle access to the hidden environment state. All checks are
// read-only over the traces they inspect and stamp their report with the
// config hash of the run.

struct CoverageOptions {
  ProblemConfig problem;               // gamma = the discount under test
  ScheduleKind env_kind = ScheduleKind::rotating;
  int K = 10;
  std::vector<long> checkpoints = {50, 100, 200};
  int replications = 200;
  std::uint64_t base_seed = 1;
  bool noiseless = false;       // feed mean rewards; beta evaluated at sigma = 0
  double beta_inflation = 1.0;  // multiply the radius (monotonicity probe)
};

struct CoverageReport {
  std::vector<long> checkpoints;
  std::vector<double> coverage;  // empirical P(||g(bar) - g(hat)||_{Vtilde^-1} <= beta)
  int replications = 0;
  double delta = 0.0;
  std::string config_hash;
};

// M replications of a drifting environment under a uniform-random arm
// policy; at each checkpoint t, tests the confidence event for the tracking
// estimator theta_bar.
CoverageReport check_confidence_coverage(const CoverageOptions& opts);

struct TrackingDominanceOptions {
  ProblemConfig problem;
  ScheduleKind env_kind = ScheduleKind::rotating;
  ArmMode arm_mode = ArmMode::orthogonal;
  int K = 10;
  int seeds = 5;
  std::uint64_t base_seed = 1;
  ProjectionOptions projection;
};

struct TrackingDominanceReport {
  long rounds = 0;             // total rounds inspected
  long event_rounds = 0;       // rounds where the confidence event held
  long fast_path_rounds = 0;   // projection trivial (theta_hat admissible)
  long eligible_rounds = 0;    // event held AND slow path
  long satisfied = 0;          // ||g(p)-g(hat)||_{V^-2} <= ||g(bar)-g(*)||_{V^-2} (1+1e-6)
  double rate = 1.0;           // satisfied / eligible (1 when nothing eligible)
  std::string config_hash;
};

// Runs BVD-GLM-UCB with oracle tracking and reports how often the projected
// parameter's tracking deviation is dominated by the drift deviation. A
// monitored rate: the inequality is a property of the global optimum of the
// deviation program, the solver is local.
TrackingDominanceReport check_tracking_dominance(const TrackingDominanceOptions& opts);

struct OutsideThetaReport {
  double pre_drift = 0.0;   // fraction of rounds with ||theta_hat|| > S, t <= T/3
  double drift = 0.0;       // T/3 < t <= 2T/3
  double post_drift = 0.0;  // t > 2T/3
  std::string config_hash;
};

// Phase-split frequency of the estimator leaving the admissible set, from a
// recorded trace on the rotating environment.
OutsideThetaReport check_outside_theta(const std::vector<RoundRecord>& trace, long T,
                                       const std::string& config_hash = "");

struct PotentialReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  std::string config_hash;
};

// Weighted elliptical potential inequality, deterministic over any
// trajectory with ||x|| <= L:
//   sum_t ||x_t||^2_{V_t^-1}
//     <= 2 max(1, L^2/lambda) (d T log(1/gamma) + log det(V_{T+1}) / lambda^d).
PotentialReport check_elliptical_potential(const std::vector<Vector>& arms, double gamma,
                                           double lambda, double L);

// Determinant-trace inequality, checked at every prefix:
//   det(V_{t+1}) <= (lambda + L^2 (1-gamma^t) / (d (1-gamma)))^d.
// Reports the tightest margin as lhs/rhs.
PotentialReport check_determinant_trace(const std::vector<Vector>& arms, double gamma,
                                        double lambda, double L);

}  // namespace nsglb
