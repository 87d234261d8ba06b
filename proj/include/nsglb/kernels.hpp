#pragma once

#include <cstddef>
#include <string>

#include "nsglb/link.hpp"

namespace nsglb::kernels {

// Batch reductions over the weighted observation history. These are the
// inner loops of the estimator and the projection solver: every Newton /
// projected-gradient iteration re-evaluates the link over the whole history
// at a fresh parameter, so the loops run O(T^2) times per simulated run.
//
// The history is stored column-major: cols[j] points at the n values of
// coordinate j. All reductions are plain sums in history order; the scalar
// and SIMD backends must agree to floating-point reassociation error only
// (equivalence-tested).
struct HistoryView {
  const double* const* cols;  // d pointers, each to n contiguous doubles
  const double* weights;      // n discount weights
  const double* rewards;      // n rewards (may be null when unused)
  std::size_t n;
  std::size_t d;
};

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_supported(Backend b);
// Test/benchmark hook; also honours the NSGLB_KERNEL env var ("scalar" /
// "avx2") at startup. Throws if the backend is not supported on this CPU.
void force_backend(Backend b);
std::string to_string(Backend b);

// out_g[j] = sum_s w_s * mu(z_s) * x_s[j],  z_s = <x_s, theta>.
// This is g_t(theta) without its ridge term.
void mu_weighted_sum(const HistoryView& h, LinkKind link, const double* theta,
                     double* out_g);

// Same partial sum plus the curvature matrix
// out_hess[j*d+k] = sum_s w_s * dmu(z_s) * x_s[j] * x_s[k] (full symmetric).
void mu_weighted_sum_jac(const HistoryView& h, LinkKind link, const double* theta,
                         double* out_g, double* out_hess);

// sum_s w_s * (b(z_s) - r_s * z_s): the data part of the quasi-likelihood.
double qmle_loss(const HistoryView& h, LinkKind link, const double* theta);

namespace detail {
// Raw backend entry points, exposed for the equivalence tests.
void mu_weighted_sum_scalar(const HistoryView&, LinkKind, const double*, double*);
void mu_weighted_sum_jac_scalar(const HistoryView&, LinkKind, const double*, double*, double*);
double qmle_loss_scalar(const HistoryView&, LinkKind, const double*);
#if defined(__x86_64__) || defined(_M_X64)
void mu_weighted_sum_avx2(const HistoryView&, LinkKind, const double*, double*);
void mu_weighted_sum_jac_avx2(const HistoryView&, LinkKind, const double*, double*, double*);
double qmle_loss_avx2(const HistoryView&, LinkKind, const double*);
// Vectorised transcendentals, exposed so tests can sweep them against libm.
void exp_pd_batch(const double* x, double* out, std::size_t n);
void log_pd_batch(const double* x, double* out, std::size_t n);
#endif
}  // namespace detail

}  // namespace nsglb::kernels
