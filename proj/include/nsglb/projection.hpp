#pragma once

#include "nsglb/config.hpp"
#include "nsglb/design.hpp"
#include "nsglb/estimator.hpp"
#include "nsglb/link.hpp"
#include "nsglb/types.hpp"

namespace nsglb {

// beta_t(delta) = sqrt(lambda) c_mu S
//               + sigma sqrt(2 log(1/delta) + d log(1 + L^2 (1-gamma^2t) / (lambda d (1-gamma^2))))
struct ConfidenceRadius {
  double beta;
  double ridge_term;      // sqrt(lambda) * c_mu * S
  double deviation_term;  // the sigma * sqrt(...) part
};

// (1 - gamma^(2t)) / (1 - gamma^2), with the gamma -> 1 removable singularity
// replaced by its limit t.
double discounted_log_ratio(double gamma, long t);

ConfidenceRadius beta_radius(long t, const ProblemConfig& config, double c_mu);

// Membership in E_t^delta(center): ||g(candidate) - g(center)||_{Vtilde^-1} <= beta.
bool in_confidence_set(const DiscountedState& state, const LinkSpec& link, double c_mu,
                       const Vector& center, const Vector& candidate, double beta);

struct ProjectionOptions {
  double tol = 1e-8;      // projected-gradient norm stop
  int max_iters = 500;
  double armijo_c = 1e-4;
  double shrink = 0.5;
};

// Solution of the joint slack program plus the reconstructed anchor
// parameter and its certificate. Feasibility (both ball constraints) holds on every return,
// converged or not.
struct ProjectionOutcome {
  Vector theta_tilde;  // admissible parameter, ||theta_tilde|| <= S
  Vector eta;          // slack, ||eta|| <= 1
  double objective = 0.0;   // ||g(theta') + beta Vtilde^(1/2) eta - g(theta_hat)||_{V^-2}
  Vector theta_p;      // g^-1(g(theta_tilde) + beta Vtilde^(1/2) eta)
  int solver_iters = 0;
  bool converged = false;
  bool fast_path = false;   // theta_hat was already admissible
  bool monotone = true;     // objective never increased across accepted steps
  double cert_gap = 0.0;    // ||g(theta_tilde) - g(theta_p)||_{Vtilde^-1}
  bool cert_ok = false;     // cert_gap <= beta (1 + 1e-6) and feasibility
};

// Generalized projection. Fast path returns theta_hat itself when it is
// admissible (the optimum is 0); otherwise projected gradient descent on the
// joint variable (theta', eta), Euclidean ball projections after each step.
ProjectionOutcome project(const DiscountedState& state, const LinkSpec& link, double c_mu,
                          const Vector& theta_hat, double beta, double S,
                          const ProjectionOptions& opts = {});

// The stationary-style projection: minimize
// ||g(theta) - g(theta_hat)||_{Vtilde^-1} over the S-ball. Used by the
// GLM-UCB baseline; same solver scaffold.
struct BallProjectionOutcome {
  Vector theta_tilde;
  double objective = 0.0;
  int solver_iters = 0;
  bool converged = false;
  bool fast_path = false;
};

BallProjectionOutcome project_ball(const DiscountedState& state, const LinkSpec& link, double c_mu,
                     const Vector& theta_hat, double S, const ProjectionOptions& opts = {});

}  // namespace nsglb
