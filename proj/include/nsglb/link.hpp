#pragma once

#include <cmath>
#include <functional>
#include <string>

namespace nsglb {

enum class LinkKind { logistic, identity };

// Scalar formulas, shared between LinkSpec and the batch kernels so there is
// a single source of truth for the math.

inline double logistic_mu(double z) {
  // 1/(1+e^{-z}), evaluated through exp(-|z|) so it never overflows.
  const double e = std::exp(-std::fabs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

inline double logistic_dmu(double z) {
  const double e = std::exp(-std::fabs(z));
  const double d = 1.0 + e;
  return e / (d * d);
}

// Primitive of the logistic: b(z) = log(1+e^z) = max(z,0) + log1p(e^{-|z|}).
inline double logistic_b(double z) {
  return std::fmax(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

inline double identity_mu(double z) { return z; }
inline double identity_dmu(double) { return 1.0; }
inline double identity_b(double z) { return 0.5 * z * z; }

// Inverse link function mu, its derivative and a primitive b (b' = mu).
struct LinkSpec {
  LinkKind kind;
  std::function<double(double)> eval;       // mu(z)
  std::function<double(double)> deriv;      // dmu(z)
  std::function<double(double)> primitive;  // b(z)
};

// Problem-dependent curvature constants of mu over the box
// {|<x,theta>| <= S*L}:  k_mu = sup dmu, c_mu = inf dmu, r_mu = k_mu/c_mu.
struct LinkConstants {
  double k_mu;
  double c_mu;
  double r_mu;
};

LinkSpec make_link(LinkKind kind);
LinkKind link_kind_from_string(const std::string& name);
std::string to_string(LinkKind kind);

// k_mu/c_mu over z in [-S*L, S*L]. Logistic and identity links use closed
// forms; anything else would fall back to the dense grid scan (kept for the
// cross-check tests). Throws if the scan finds c_mu <= 0.
LinkConstants compute_constants(const LinkSpec& link, double S, double L);

// Grid-scan variant used as an independent oracle in tests.
LinkConstants compute_constants_grid(const LinkSpec& link, double S, double L,
                                     int points = 10000);

}  // namespace nsglb
