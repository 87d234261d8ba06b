#include "nsglb/estimator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nsglb/kernels.hpp"

namespace nsglb {

Vector g_map(const DiscountedState& state, const LinkSpec& link, double c_mu,
             const Vector& theta) {
  if (theta.size() != state.dim()) throw std::invalid_argument("g_map: dimension mismatch");
  Vector out(state.dim());
  kernels::mu_weighted_sum(state.history(), link.kind, theta.data(), out.data());
  out += state.lambda() * c_mu * theta;
  return out;
}

Matrix g_jacobian(const DiscountedState& state, const LinkSpec& link, double c_mu,
                  const Vector& theta) {
  const int d = state.dim();
  Vector g(d);
  Matrix jac(d, d);
  kernels::mu_weighted_sum_jac(state.history(), link.kind, theta.data(), g.data(), jac.data());
  jac += state.lambda() * c_mu * Matrix::Identity(d, d);
  return jac;
}

void g_map_with_jacobian(const DiscountedState& state, const LinkSpec& link, double c_mu,
                         const Vector& theta, Vector& g, Matrix& jac) {
  const int d = state.dim();
  g.resize(d);
  jac.resize(d, d);
  kernels::mu_weighted_sum_jac(state.history(), link.kind, theta.data(), g.data(), jac.data());
  const double ridge = state.lambda() * c_mu;
  g += ridge * theta;
  jac += ridge * Matrix::Identity(d, d);
}

Vector g_inverse(const DiscountedState& state, const LinkSpec& link, double c_mu,
                 const Vector& z, double tol) {
  if (z.size() != state.dim()) throw std::invalid_argument("g_inverse: dimension mismatch");
  const int d = state.dim();
  const double ridge = state.lambda() * c_mu;

  Vector theta = z / ridge;  // exact for empty history; sane scale otherwise
  Vector g(d);
  Matrix jac(d, d);
  g_map_with_jacobian(state, link, c_mu, theta, g, jac);
  Vector resid = g - z;
  double rnorm = resid.norm();

  for (int iter = 0; iter < 200; ++iter) {
    if (rnorm <= tol) return theta;
    const Vector step = jac.llt().solve(-resid);
    // damped step: halve until the residual actually decreases
    double alpha = 1.0;
    while (true) {
      const Vector trial = theta + alpha * step;
      g_map_with_jacobian(state, link, c_mu, trial, g, jac);
      const Vector trial_resid = g - z;
      if (trial_resid.norm() < rnorm || alpha < 1e-12) {
        theta = trial;
        resid = trial_resid;
        rnorm = resid.norm();
        break;
      }
      alpha *= 0.5;
    }
  }
  std::ostringstream msg;
  msg << "g_inverse: no convergence after 200 iterations, residual " << rnorm;
  throw std::runtime_error(msg.str());
}

Vector weighted_reward_sum(const DiscountedState& state) {
  const auto h = state.history();
  Vector out = Vector::Zero(state.dim());
  for (std::size_t s = 0; s < h.n; ++s)
    for (int j = 0; j < state.dim(); ++j) out[j] += h.weights[s] * h.rewards[s] * h.cols[j][s];
  return out;
}

QmleResult fit_qmle(const DiscountedState& state, const LinkSpec& link, double c_mu,
                    const std::optional<Vector>& warm_start, double grad_tol, int max_iters) {
  const int d = state.dim();
  const double ridge = state.lambda() * c_mu;
  const Vector target = weighted_reward_sum(state);
  const auto h = state.history();

  const auto objective = [&](const Vector& th) {
    return kernels::qmle_loss(h, link.kind, th.data()) + 0.5 * ridge * th.squaredNorm();
  };

  QmleResult res;
  Vector theta = warm_start ? *warm_start : Vector::Zero(d);
  if (theta.size() != d) throw std::invalid_argument("fit_qmle: warm start dimension mismatch");

  Vector g(d);
  Matrix hess(d, d);
  g_map_with_jacobian(state, link, c_mu, theta, g, hess);
  Vector grad = g - target;
  double fval = objective(theta);

  constexpr double kArmijoC = 1e-4;
  for (int iter = 0; iter < max_iters; ++iter) {
    res.iterations = iter;
    res.grad_norm = grad.norm();
    if (res.grad_norm <= grad_tol) {
      res.converged = true;
      break;
    }
    const Vector step = hess.llt().solve(-grad);
    const double slope = grad.dot(step);  // < 0: Newton direction on a PD Hessian
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector trial = theta + alpha * step;
      if ((trial.array() == theta.array()).all()) break;  // step underflowed: no movement
      const double ftrial = objective(trial);
      if (ftrial <= fval + kArmijoC * alpha * slope) {
        theta = trial;
        fval = ftrial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (accepted) {
      g_map_with_jacobian(state, link, c_mu, theta, g, hess);
      grad = g - target;
      continue;
    }
    // Sufficient decrease is unresolvable once objective differences sit at
    // the rounding floor; the full Newton step still contracts the gradient
    // there, which is what the stopping rule measures.
    const Vector trial = theta + step;
    Vector g_trial(d);
    Matrix hess_trial(d, d);
    g_map_with_jacobian(state, link, c_mu, trial, g_trial, hess_trial);
    const Vector grad_trial = g_trial - target;
    if (grad_trial.norm() >= grad.norm()) break;  // genuinely stuck
    theta = trial;
    fval = objective(theta);
    g = std::move(g_trial);
    hess = std::move(hess_trial);
    grad = grad_trial;
  }
  res.grad_norm = grad.norm();
  if (res.grad_norm <= grad_tol) res.converged = true;
  res.theta_hat = std::move(theta);
  return res;
}

Vector theta_bar_oracle(const DiscountedState& state, const LinkSpec& link, double c_mu,
                        const std::vector<Vector>& true_params, const Vector& theta_star_t) {
  const auto h = state.history();
  if (true_params.size() != h.n)
    throw std::invalid_argument("theta_bar_oracle: true_params length must match history");
  if (theta_star_t.size() != state.dim())
    throw std::invalid_argument("theta_bar_oracle: dimension mismatch");

  Vector z = state.lambda() * c_mu * theta_star_t;
  for (std::size_t s = 0; s < h.n; ++s) {
    double dot = 0.0;
    for (int j = 0; j < state.dim(); ++j) dot += true_params[s][j] * h.cols[j][s];
    const double m = link.eval(dot);
    for (int j = 0; j < state.dim(); ++j) z[j] += h.weights[s] * m * h.cols[j][s];
  }
  return g_inverse(state, link, c_mu, z);
}

}  // namespace nsglb
