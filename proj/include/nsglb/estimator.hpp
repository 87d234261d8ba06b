#pragma once

#include <optional>
#include <vector>

#include "nsglb/design.hpp"
#include "nsglb/link.hpp"
#include "nsglb/types.hpp"

namespace nsglb {

struct QmleResult {
  Vector theta_hat;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// g_t(theta) = sum_s gamma^(t-1-s) mu(<x_s, theta>) x_s + lambda c_mu theta.
Vector g_map(const DiscountedState& state, const LinkSpec& link, double c_mu,
             const Vector& theta);

// Jacobian of g_t: sum_s w_s dmu(<x_s,theta>) x_s x_s' + lambda c_mu I  (PD).
Matrix g_jacobian(const DiscountedState& state, const LinkSpec& link, double c_mu,
                  const Vector& theta);

// Both in one history pass (the inner loop of every solver here).
void g_map_with_jacobian(const DiscountedState& state, const LinkSpec& link, double c_mu,
                         const Vector& theta, Vector& g, Matrix& jac);

// Inverse of the bijection g_t, by damped Newton on g(theta) - z.
// Guarantees ||g(result) - z|| <= tol; throws (with the final residual in the
// message) if 200 iterations don't get there, which indicates a numerics bug.
Vector g_inverse(const DiscountedState& state, const LinkSpec& link, double c_mu,
                 const Vector& z, double tol = 1e-8);

// sum_s w_s r_{s+1} x_s, the data term of the score equation.
Vector weighted_reward_sum(const DiscountedState& state);

// Discounted quasi-MLE: minimizes
//   sum_s w_s [ b(<x_s,theta>) - r_{s+1} <x_s,theta> ] + (lambda c_mu / 2)||theta||^2
// by Newton with Armijo backtracking. Warm start from the previous round's
// estimate when available.
QmleResult fit_qmle(const DiscountedState& state, const LinkSpec& link, double c_mu,
                    const std::optional<Vector>& warm_start = std::nullopt,
                    double grad_tol = 1e-8, int max_iters = 100);

// Noiseless tracking estimator: the parameter theta_bar with
//   g_t(theta_bar) = sum_s w_s mu(<x_s, theta*_s>) x_s + lambda c_mu theta*_t.
// Diagnostics only -- the caller supplies the environment's hidden sequence,
// aligned with the state's history.
Vector theta_bar_oracle(const DiscountedState& state, const LinkSpec& link, double c_mu,
                        const std::vector<Vector>& true_params, const Vector& theta_star_t);

}  // namespace nsglb
