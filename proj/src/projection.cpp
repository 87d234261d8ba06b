#include "nsglb/projection.hpp"

#include <cmath>

#include "nsglb/kernels.hpp"

namespace nsglb {

double discounted_log_ratio(double gamma, long t) {
  if (gamma >= 1.0) return static_cast<double>(t);
  // (1 - gamma^(2t)) / (1 - gamma^2), both through expm1 for gamma near 1
  const double lg = std::log(gamma);
  const double num = -std::expm1(2.0 * static_cast<double>(t) * lg);
  const double den = -std::expm1(2.0 * lg);
  return num / den;
}

ConfidenceRadius beta_radius(long t, const ProblemConfig& config, double c_mu) {
  ConfidenceRadius out;
  out.ridge_term = std::sqrt(config.lambda) * c_mu * config.S;
  const double ratio = discounted_log_ratio(config.gamma, t);
  const double inside = 2.0 * std::log(1.0 / config.delta) +
                        config.d * std::log1p(config.L * config.L * ratio /
                                              (config.lambda * config.d));
  out.deviation_term = config.sigma * std::sqrt(inside);
  out.beta = out.ridge_term + out.deviation_term;
  return out;
}

bool in_confidence_set(const DiscountedState& state, const LinkSpec& link, double c_mu,
                       const Vector& center, const Vector& candidate, double beta) {
  const Vector gap = g_map(state, link, c_mu, candidate) - g_map(state, link, c_mu, center);
  return state.mahalanobis_tilde_inv(gap) <= beta;
}

namespace {

inline Vector clip_to_ball(const Vector& v, double radius) {
  const double n = v.norm();
  if (n <= radius) return v;
  return v * (radius / n);
}

}  // namespace

ProjectionOutcome project(const DiscountedState& state, const LinkSpec& link, double c_mu,
                          const Vector& theta_hat, double beta, double S,
                          const ProjectionOptions& opts) {
  const int d = state.dim();
  ProjectionOutcome out;

  if (theta_hat.norm() <= S) {
    // the joint program is minimized at (theta_hat, 0) with objective exactly 0.
    out.theta_tilde = theta_hat;
    out.eta = Vector::Zero(d);
    out.theta_p = theta_hat;
    out.objective = 0.0;
    out.converged = true;
    out.fast_path = true;
    out.cert_gap = 0.0;
    out.cert_ok = true;
    return out;
  }

  const Vector gh = g_map(state, link, c_mu, theta_hat);
  const Matrix& sq = state.sqrt_tilde();

  // joint variable (theta', eta)
  Vector theta = S * theta_hat / theta_hat.norm();
  Vector g(d);
  Matrix jac(d, d);
  g_map_with_jacobian(state, link, c_mu, theta, g, jac);
  Vector eta = clip_to_ball(state.inv_sqrt_tilde() * (gh - g) / beta, 1.0);

  // F(theta', eta) = || V^-1 (g(theta') + beta sq eta - g(theta_hat)) ||^2
  const auto residual = [&](const Vector& gval, const Vector& e) -> Vector {
    return state.solve_V(gval + beta * (sq * e) - gh);
  };
  Vector r = residual(g, eta);
  double fval = r.squaredNorm();

  bool converged = false;
  int iters = 0;
  for (; iters < opts.max_iters; ++iters) {
    // grad_theta = 2 J V^-2 u,  grad_eta = 2 beta sq V^-2 u
    const Vector s = state.solve_V(r);
    const Vector grad_theta = 2.0 * (jac * s);
    const Vector grad_eta = 2.0 * beta * (sq * s);

    // unit-step projected gradient, for the stopping rule
    const Vector pg_theta = theta - clip_to_ball(theta - grad_theta, S);
    const Vector pg_eta = eta - clip_to_ball(eta - grad_eta, 1.0);
    const double pg_norm = std::sqrt(pg_theta.squaredNorm() + pg_eta.squaredNorm());
    if (pg_norm <= opts.tol) {
      converged = true;
      break;
    }

    double alpha = 1.0;
    bool accepted = false;
    Vector g_trial(d);
    for (int ls = 0; ls < 60; ++ls) {
      const Vector theta_trial = clip_to_ball(theta - alpha * grad_theta, S);
      const Vector eta_trial = clip_to_ball(eta - alpha * grad_eta, 1.0);
      if ((theta_trial.array() == theta.array()).all() &&
          (eta_trial.array() == eta.array()).all())
        break;  // step underflowed: no movement left at this scale
      const double decrease = grad_theta.dot(theta_trial - theta) + grad_eta.dot(eta_trial - eta);
      kernels::mu_weighted_sum(state.history(), link.kind, theta_trial.data(), g_trial.data());
      g_trial += state.lambda() * c_mu * theta_trial;
      const Vector r_trial = residual(g_trial, eta_trial);
      const double f_trial = r_trial.squaredNorm();
      if (f_trial <= fval + opts.armijo_c * decrease) {
        if (f_trial > fval) out.monotone = false;
        theta = theta_trial;
        eta = eta_trial;
        fval = f_trial;
        r = r_trial;
        accepted = true;
        break;
      }
      alpha *= opts.shrink;
    }
    if (!accepted) break;  // line search exhausted at noise level
    g_map_with_jacobian(state, link, c_mu, theta, g, jac);
  }

  out.theta_tilde = theta;
  out.eta = eta;
  out.objective = std::sqrt(fval);
  out.solver_iters = iters;
  out.converged = converged;

  // Reconstruct the anchor parameter and check the certificate
  //   theta_p = g^-1(g(theta_tilde) + beta sq eta),
  //   theta_tilde in E_t^delta(theta_p) i.e. gap <= beta.
  const Vector g_tilde = g_map(state, link, c_mu, theta);
  out.theta_p = g_inverse(state, link, c_mu, g_tilde + beta * (sq * eta));
  const Vector gp = g_map(state, link, c_mu, out.theta_p);
  out.cert_gap = state.mahalanobis_tilde_inv(g_tilde - gp);
  out.cert_ok = out.cert_gap <= beta * (1.0 + 1e-6) &&
                theta.norm() <= S * (1.0 + 1e-9) && eta.norm() <= 1.0 + 1e-9;
  return out;
}

BallProjectionOutcome project_ball(const DiscountedState& state, const LinkSpec& link, double c_mu,
                     const Vector& theta_hat, double S, const ProjectionOptions& opts) {
  const int d = state.dim();
  BallProjectionOutcome out;
  if (theta_hat.norm() <= S) {
    out.theta_tilde = theta_hat;
    out.objective = 0.0;
    out.converged = true;
    out.fast_path = true;
    return out;
  }

  const Vector gh = g_map(state, link, c_mu, theta_hat);
  Vector theta = S * theta_hat / theta_hat.norm();
  Vector g(d);
  Matrix jac(d, d);
  g_map_with_jacobian(state, link, c_mu, theta, g, jac);

  // F(theta) = || g(theta) - g(theta_hat) ||^2_{Vtilde^-1}
  const auto fof = [&](const Vector& gval) {
    return state.solve_Vtilde(gval - gh).dot(gval - gh);
  };
  double fval = fof(g);

  bool converged = false;
  int iters = 0;
  for (; iters < opts.max_iters; ++iters) {
    const Vector grad = 2.0 * (jac * state.solve_Vtilde(g - gh));
    const Vector pg = theta - clip_to_ball(theta - grad, S);
    if (pg.norm() <= opts.tol) {
      converged = true;
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    Vector g_trial(d);
    for (int ls = 0; ls < 60; ++ls) {
      const Vector trial = clip_to_ball(theta - alpha * grad, S);
      if ((trial.array() == theta.array()).all()) break;
      kernels::mu_weighted_sum(state.history(), link.kind, trial.data(), g_trial.data());
      g_trial += state.lambda() * c_mu * trial;
      const double f_trial = fof(g_trial);
      if (f_trial <= fval + opts.armijo_c * grad.dot(trial - theta)) {
        theta = trial;
        fval = f_trial;
        accepted = true;
        break;
      }
      alpha *= opts.shrink;
    }
    if (!accepted) break;
    g_map_with_jacobian(state, link, c_mu, theta, g, jac);
  }

  out.theta_tilde = theta;
  out.objective = std::sqrt(std::max(fval, 0.0));
  out.solver_iters = iters;
  out.converged = converged;
  return out;
}

}  // namespace nsglb
