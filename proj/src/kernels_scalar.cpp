#include "nsglb/kernels.hpp"

#include <cstring>

// Reference implementations. One fused loop per kernel, element order equal
// to history order; the SIMD variants are tested against these.

namespace nsglb::kernels::detail {

namespace {

template <class Mu>
void mu_sum_impl(const HistoryView& h, Mu mu, const double* theta, double* out_g) {
  const std::size_t n = h.n, d = h.d;
  std::memset(out_g, 0, d * sizeof(double));
  for (std::size_t s = 0; s < n; ++s) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * h.cols[j][s];
    const double f = h.weights[s] * mu(z);
    for (std::size_t j = 0; j < d; ++j) out_g[j] += f * h.cols[j][s];
  }
}

template <class Mu, class Dmu>
void mu_sum_jac_impl(const HistoryView& h, Mu mu, Dmu dmu, const double* theta,
                     double* out_g, double* out_hess) {
  const std::size_t n = h.n, d = h.d;
  std::memset(out_g, 0, d * sizeof(double));
  std::memset(out_hess, 0, d * d * sizeof(double));
  for (std::size_t s = 0; s < n; ++s) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * h.cols[j][s];
    const double w = h.weights[s];
    const double f = w * mu(z);
    const double g = w * dmu(z);
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = h.cols[j][s];
      out_g[j] += f * xj;
      const double gx = g * xj;
      for (std::size_t k = j; k < d; ++k) out_hess[j * d + k] += gx * h.cols[k][s];
    }
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < j; ++k) out_hess[j * d + k] = out_hess[k * d + j];
}

template <class B>
double loss_impl(const HistoryView& h, B b, const double* theta) {
  const std::size_t n = h.n, d = h.d;
  double acc = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * h.cols[j][s];
    acc += h.weights[s] * (b(z) - h.rewards[s] * z);
  }
  return acc;
}

}  // namespace

void mu_weighted_sum_scalar(const HistoryView& h, LinkKind link, const double* theta,
                            double* out_g) {
  if (link == LinkKind::logistic)
    mu_sum_impl(h, logistic_mu, theta, out_g);
  else
    mu_sum_impl(h, identity_mu, theta, out_g);
}

void mu_weighted_sum_jac_scalar(const HistoryView& h, LinkKind link, const double* theta,
                                double* out_g, double* out_hess) {
  if (link == LinkKind::logistic)
    mu_sum_jac_impl(h, logistic_mu, logistic_dmu, theta, out_g, out_hess);
  else
    mu_sum_jac_impl(h, identity_mu, identity_dmu, theta, out_g, out_hess);
}

double qmle_loss_scalar(const HistoryView& h, LinkKind link, const double* theta) {
  if (link == LinkKind::logistic) return loss_impl(h, logistic_b, theta);
  return loss_impl(h, identity_b, theta);
}

}  // namespace nsglb::kernels::detail
