#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nsglb/design.hpp"
#include "nsglb/rng.hpp"

using namespace nsglb;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

// from-scratch recomputation of both design matrices from the raw history
void definitional_sums(const DiscountedState& st, Matrix& V, Matrix& Vt) {
  const int d = st.dim();
  V = st.lambda() * Matrix::Identity(d, d);
  Vt = V;
  for (std::size_t s = 0; s < st.size(); ++s) {
    const Vector x = st.arm(s);
    const double w = std::pow(st.gamma(), static_cast<double>(st.t() - 1 - st.birth_rounds()[s]));
    V += w * x * x.transpose();
    Vt += w * w * x * x.transpose();
  }
}

}  // namespace

TEST_CASE("init produces lambda I and an empty history") {
  DiscountedState a(2, 1.0, 0.9);
  CHECK(a.t() == 1);
  CHECK(a.size() == 0);
  CHECK((a.V() - Matrix::Identity(2, 2)).norm() == 0.0);
  DiscountedState b(1, 2.0, 0.5);
  CHECK(b.V()(0, 0) == 2.0);
  DiscountedState c(3, 1.0, 0.99);
  CHECK((c.Vtilde() - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("init rejects bad parameters") {
  CHECK_THROWS_AS(DiscountedState(0, 1.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(DiscountedState(2, 0.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(DiscountedState(2, -1.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(DiscountedState(2, 1e-9, 0.9), std::invalid_argument);  // below the 1e-8 floor
  CHECK_THROWS_AS(DiscountedState(2, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(DiscountedState(2, 1.0, 1.2), std::invalid_argument);
  // gamma = 1 is the stationary degeneracy and is allowed
  CHECK_NOTHROW(DiscountedState(2, 1.0, 1.0));
}

TEST_CASE("hand-checked d=1 update recursion") {
  DiscountedState st(1, 1.0, 0.5);
  st.update(vec({1.0}), 1.0);
  CHECK(st.V()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));  // 0.5*1 + 1 + 0.5*1
  st.update(vec({1.0}), 0.0);
  CHECK(st.V()(0, 0) == doctest::Approx(2.5).epsilon(1e-15));  // 0.5*2 + 1 + 0.5*1
  CHECK(st.t() == 3);
  CHECK(st.size() == 2);
}

TEST_CASE("zero arm shrinks V toward lambda I") {
  DiscountedState st(2, 1.0, 0.9);
  st.update(vec({0.8, 0.0}), 0.5);
  const Matrix before = st.V();
  st.update(vec({0.0, 0.0}), 0.5);
  const Matrix expected = 0.9 * before + 0.1 * Matrix::Identity(2, 2);
  CHECK((st.V() - expected).norm() < 1e-14);
}

TEST_CASE("update enforces the reward and arm-norm bounds") {
  DiscountedState st(2, 1.0, 0.9, /*arm_norm_bound=*/1.0, /*reward_bound=*/1.0);
  CHECK_THROWS_AS(st.update(vec({0.5, 0.0}), 1.5), std::domain_error);
  CHECK_THROWS_AS(st.update(vec({0.5, 0.0}), -0.1), std::domain_error);
  CHECK_THROWS_AS(st.update(vec({2.0, 0.0}), 0.5), std::domain_error);
  CHECK_THROWS_AS(st.update(vec({0.5, 0.0, 0.1}), 0.5), std::invalid_argument);
  CHECK_NOTHROW(st.update(vec({0.5, 0.0}), 1.0));
}

TEST_CASE("recursion matches the definitional sums after random updates") {
  std::mt19937_64 rng = make_stream(11, Stream::scratch);
  for (const double gamma : {0.5, 0.9, 0.999, 1.0}) {
    DiscountedState st(3, 0.7, gamma);
    for (int k = 0; k < 50; ++k) {
      Vector x(3);
      for (int j = 0; j < 3; ++j) x[j] = 2.0 * uniform01(rng) - 1.0;
      st.update(x, uniform01(rng));
      Matrix V, Vt;
      definitional_sums(st, V, Vt);
      CHECK((st.V() - V).norm() / V.norm() < 1e-8);
      CHECK((st.Vtilde() - Vt).norm() / Vt.norm() < 1e-8);
    }
  }
}

TEST_CASE("Loewner order V >= Vtilde >= lambda I") {
  std::mt19937_64 rng = make_stream(12, Stream::scratch);
  DiscountedState st(3, 0.8, 0.93);
  for (int k = 0; k < 40; ++k) {
    Vector x(3);
    for (int j = 0; j < 3; ++j) x[j] = 2.0 * uniform01(rng) - 1.0;
    st.update(x, uniform01(rng));
    const Eigen::SelfAdjointEigenSolver<Matrix> e1(st.V() - st.Vtilde());
    const Eigen::SelfAdjointEigenSolver<Matrix> e2(st.Vtilde() - 0.8 * Matrix::Identity(3, 3));
    CHECK(e1.eigenvalues().minCoeff() >= -1e-10);
    CHECK(e2.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("weights are positive, decreasing with age, and end at 1") {
  std::mt19937_64 rng = make_stream(13, Stream::scratch);
  DiscountedState st(1, 1.0, 0.7);
  for (int k = 0; k < 20; ++k) {
    st.update(vec({uniform01(rng)}), uniform01(rng));
    const auto& w = st.weights();
    CHECK(w.back() == 1.0);
    for (std::size_t s = 0; s + 1 < w.size(); ++s) {
      CHECK(w[s] > 0.0);
      CHECK(w[s] < w[s + 1]);
    }
    // exact materialisation from the integer age
    for (std::size_t s = 0; s < w.size(); ++s)
      CHECK(w[s] == std::pow(0.7, static_cast<double>(st.t() - 1 - st.birth_rounds()[s])));
  }
}

TEST_CASE("mahalanobis norms: isotropic and scalar cases") {
  DiscountedState iso(3, 4.0, 0.9);  // V = 4 I
  const Vector x = vec({1.0, 2.0, -2.0});
  CHECK(iso.mahalanobis_inv(x) == doctest::Approx(x.norm() / 2.0).epsilon(1e-12));
  CHECK(iso.mahalanobis_inv2(x) == doctest::Approx(x.norm() / 4.0).epsilon(1e-12));
  CHECK(iso.mahalanobis_tilde_inv(x) == doctest::Approx(x.norm() / 2.0).epsilon(1e-12));

  DiscountedState scalar(1, 2.0, 0.9);  // V = [2]
  CHECK(scalar.mahalanobis_inv(vec({3.0})) ==
        doctest::Approx(2.1213203435596424).epsilon(1e-12));
  CHECK_THROWS_AS(scalar.mahalanobis_inv(vec({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("sqrt_tilde: isotropic, diagonal, and random self-consistency") {
  DiscountedState iso(2, 4.0, 0.9);  // Vtilde = 4 I
  CHECK((iso.sqrt_tilde() - 2.0 * Matrix::Identity(2, 2)).norm() < 1e-12);

  // one update from empty: Vtilde = x x' + lambda I = diag(1, 9) for x=(0, sqrt 8)
  DiscountedState diag(2, 1.0, 0.9);
  diag.update(vec({0.0, std::sqrt(8.0)}), 0.5);
  Matrix expect(2, 2);
  expect << 1.0, 0.0, 0.0, 3.0;
  CHECK((diag.sqrt_tilde() - expect).norm() < 1e-10);

  std::mt19937_64 rng = make_stream(14, Stream::scratch);
  DiscountedState st(4, 0.5, 0.95);
  for (int k = 0; k < 25; ++k) {
    Vector x(4);
    for (int j = 0; j < 4; ++j) x[j] = 2.0 * uniform01(rng) - 1.0;
    st.update(x, uniform01(rng));
  }
  CHECK((st.sqrt_tilde() * st.sqrt_tilde() - st.Vtilde()).norm() / st.Vtilde().norm() < 1e-8);
  CHECK((st.sqrt_tilde() * st.inv_sqrt_tilde() - Matrix::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("optional weight floor drops stale history but keeps the matrices") {
  DiscountedState st(1, 1.0, 0.5);
  st.set_weight_floor(1e-12);
  for (int k = 0; k < 80; ++k) st.update(vec({1.0}), 1.0);
  // 0.5^40 = 9e-13 < 1e-12: old entries must be gone
  CHECK(st.size() < 60);
  Matrix V, Vt;
  definitional_sums(st, V, Vt);
  CHECK(std::fabs(st.V()(0, 0) - V(0, 0)) < 1e-8);
  for (double wv : st.weights()) CHECK(wv >= 1e-12);
}
