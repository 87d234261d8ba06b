#include "nsglb/design.hpp"

#include <cmath>
#include <stdexcept>

namespace nsglb {

DiscountedState::DiscountedState(int d, double lambda, double gamma,
                                 double arm_norm_bound, double reward_bound)
    : d_(d),
      lambda_(lambda),
      gamma_(gamma),
      arm_norm_bound_(arm_norm_bound),
      reward_bound_(reward_bound) {
  if (d < 1) throw std::invalid_argument("DiscountedState: d must be >= 1");
  // floor keeps every Cholesky factorization well-posed
  if (lambda < 1e-8) throw std::invalid_argument("DiscountedState: lambda must be >= 1e-8");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("DiscountedState: gamma must be in (0,1]");
  V_ = Matrix::Identity(d, d) * lambda;
  Vtilde_ = V_;
  cols_.resize(d);
  col_ptrs_.resize(d, nullptr);
  refresh_factorizations();
}

void DiscountedState::update(const Vector& x, double reward) {
  if (x.size() != d_) throw std::invalid_argument("DiscountedState::update: dimension mismatch");
  if (std::isfinite(reward_bound_) && (reward < 0.0 || reward > reward_bound_))
    throw std::domain_error("DiscountedState::update: reward outside [0, 2*sigma]");
  if (std::isfinite(arm_norm_bound_) && x.norm() > arm_norm_bound_ * (1.0 + 1e-12))
    throw std::domain_error("DiscountedState::update: arm norm exceeds L");

  V_ = gamma_ * V_ + x * x.transpose() +
       (1.0 - gamma_) * lambda_ * Matrix::Identity(d_, d_);
  Vtilde_ = gamma_ * gamma_ * (Vtilde_ - lambda_ * Matrix::Identity(d_, d_)) +
            x * x.transpose() + lambda_ * Matrix::Identity(d_, d_);

  for (int j = 0; j < d_; ++j) cols_[j].push_back(x[j]);
  rewards_.push_back(reward);
  birth_.push_back(t_);
  ++t_;

  refresh_weights();
  refresh_factorizations();
}

void DiscountedState::refresh_weights() {
  if (weight_floor_ > 0.0 && !birth_.empty()) {
    // Drop entries whose weight can no longer matter. Entries are in birth
    // order, so the stale ones form a prefix.
    std::size_t drop = 0;
    while (drop < birth_.size() &&
           std::pow(gamma_, static_cast<double>(t_ - 1 - birth_[drop])) < weight_floor_)
      ++drop;
    if (drop > 0) {
      for (int j = 0; j < d_; ++j) cols_[j].erase(cols_[j].begin(), cols_[j].begin() + drop);
      rewards_.erase(rewards_.begin(), rewards_.begin() + drop);
      birth_.erase(birth_.begin(), birth_.begin() + drop);
    }
  }
  weights_.resize(birth_.size());
  for (std::size_t s = 0; s < birth_.size(); ++s)
    weights_[s] = std::pow(gamma_, static_cast<double>(t_ - 1 - birth_[s]));
  for (int j = 0; j < d_; ++j) col_ptrs_[j] = cols_[j].data();
}

void DiscountedState::refresh_factorizations() {
  llt_V_.compute(V_);
  llt_Vt_.compute(Vtilde_);
  if (llt_V_.info() != Eigen::Success || llt_Vt_.info() != Eigen::Success)
    throw std::runtime_error("DiscountedState: Cholesky failed (matrix not PD?)");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Vtilde_);
  const Vector ev = eig.eigenvalues();
  sqrt_Vt_ = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  inv_sqrt_Vt_ = eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                 eig.eigenvectors().transpose();
}

double DiscountedState::mahalanobis_inv(const Vector& x) const {
  if (x.size() != d_) throw std::invalid_argument("mahalanobis_inv: dimension mismatch");
  return llt_V_.matrixL().solve(x).norm();
}

double DiscountedState::mahalanobis_inv2(const Vector& v) const {
  if (v.size() != d_) throw std::invalid_argument("mahalanobis_inv2: dimension mismatch");
  return llt_V_.solve(v).norm();
}

double DiscountedState::mahalanobis_tilde_inv(const Vector& v) const {
  if (v.size() != d_) throw std::invalid_argument("mahalanobis_tilde_inv: dimension mismatch");
  return llt_Vt_.matrixL().solve(v).norm();
}

double DiscountedState::mahalanobis_inv_tilde_inv(const Vector& x) const {
  if (x.size() != d_) throw std::invalid_argument("mahalanobis_inv_tilde_inv: dimension mismatch");
  const Vector y = llt_V_.solve(x);
  return std::sqrt(y.dot(Vtilde_ * y));
}

kernels::HistoryView DiscountedState::history() const {
  kernels::HistoryView h;
  h.cols = col_ptrs_.data();
  h.weights = weights_.data();
  h.rewards = rewards_.data();
  h.n = rewards_.size();
  h.d = static_cast<std::size_t>(d_);
  return h;
}

Vector DiscountedState::arm(std::size_t s) const {
  Vector x(d_);
  for (int j = 0; j < d_; ++j) x[j] = cols_[j][s];
  return x;
}

}  // namespace nsglb
