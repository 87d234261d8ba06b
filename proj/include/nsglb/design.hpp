#pragma once

#include <Eigen/Cholesky>
#include <limits>
#include <vector>

#include "nsglb/kernels.hpp"
#include "nsglb/types.hpp"

namespace nsglb {

// Discounted design matrices and weighted observation history.
//
//   V_t      = sum_s gamma^(t-1-s) x_s x_s' + lambda I
//   Vtilde_t = sum_s gamma^(2(t-1-s)) x_s x_s' + lambda I
//
// maintained by the rank-one recursions
//
//   V      <- gamma   * V + x x' + (1-gamma)   * lambda I
//   Vtilde <- gamma^2 * (Vtilde - lambda I) + x x' + lambda I
//
// The raw history is retained (the g_t map re-evaluates mu(<x_s, theta>) at
// arbitrary theta each round) in column-major layout for the batch kernels.
// Weights are never mutated in place: each entry stores its birth round and
// gamma^age is materialised from scratch on update, so there is no
// compounding round-off across rounds.
//
// Single writer per run; all accessors are const and safe to call
// concurrently once a round's update has completed.
class DiscountedState {
 public:
  // gamma = 1 is accepted (stationary baselines run the same machinery with
  // all weights equal to 1).
  DiscountedState(int d, double lambda, double gamma,
                  double arm_norm_bound = std::numeric_limits<double>::infinity(),
                  double reward_bound = std::numeric_limits<double>::infinity());

  // Appends one observation, advances the round counter, refreshes the
  // factorizations. Throws if the reward violates [0, reward_bound] or the
  // arm violates the norm bound (when those bounds are finite).
  void update(const Vector& x, double reward);

  long t() const { return t_; }
  int dim() const { return d_; }
  double lambda() const { return lambda_; }
  double gamma() const { return gamma_; }
  std::size_t size() const { return rewards_.size(); }

  const Matrix& V() const { return V_; }
  const Matrix& Vtilde() const { return Vtilde_; }

  // ||x||_{V^-1}
  double mahalanobis_inv(const Vector& x) const;
  // ||v||_{V^-2} = ||V^-1 v||_2
  double mahalanobis_inv2(const Vector& v) const;
  // ||v||_{Vtilde^-1}
  double mahalanobis_tilde_inv(const Vector& v) const;
  // ||x||_{V^-1 Vtilde V^-1} (the weighted-linear-UCB bonus metric)
  double mahalanobis_inv_tilde_inv(const Vector& x) const;

  Vector solve_V(const Vector& v) const { return llt_V_.solve(v); }
  Vector solve_Vtilde(const Vector& v) const { return llt_Vt_.solve(v); }

  // Symmetric PSD square root of Vtilde (and its inverse), via
  // eigendecomposition; refreshed on update.
  const Matrix& sqrt_tilde() const { return sqrt_Vt_; }
  const Matrix& inv_sqrt_tilde() const { return inv_sqrt_Vt_; }

  // Read-only history access (tests and the estimator kernels).
  kernels::HistoryView history() const;
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<long>& birth_rounds() const { return birth_; }
  // coordinate j of observation s
  double arm_coord(std::size_t s, int j) const { return cols_[j][s]; }
  Vector arm(std::size_t s) const;

  // Optional truncation of negligible-weight history entries (default off).
  void set_weight_floor(double floor) { weight_floor_ = floor; }

 private:
  void refresh_weights();
  void refresh_factorizations();

  int d_;
  double lambda_;
  double gamma_;
  double arm_norm_bound_;
  double reward_bound_;
  double weight_floor_ = 0.0;

  long t_ = 1;
  Matrix V_;
  Matrix Vtilde_;
  std::vector<std::vector<double>> cols_;  // d columns, one value per observation
  std::vector<double> rewards_;
  std::vector<long> birth_;    // round index s at which the entry was observed
  std::vector<double> weights_;  // gamma^(t-1-s), rebuilt each round
  std::vector<const double*> col_ptrs_;

  Eigen::LLT<Matrix> llt_V_;
  Eigen::LLT<Matrix> llt_Vt_;
  Matrix sqrt_Vt_;
  Matrix inv_sqrt_Vt_;
};

}  // namespace nsglb
