#include "nsglb/link.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace nsglb {

LinkSpec make_link(LinkKind kind) {
  switch (kind) {
    case LinkKind::logistic:
      return LinkSpec{kind, logistic_mu, logistic_dmu, logistic_b};
    case LinkKind::identity:
      return LinkSpec{kind, identity_mu, identity_dmu, identity_b};
  }
  throw std::invalid_argument("make_link: unknown link kind");
}

LinkKind link_kind_from_string(const std::string& name) {
  if (name == "logistic") return LinkKind::logistic;
  if (name == "identity") return LinkKind::identity;
  throw std::invalid_argument("unknown link \"" + name + "\" (expected \"logistic\" or \"identity\")");
}

std::string to_string(LinkKind kind) {
  return kind == LinkKind::logistic ? "logistic" : "identity";
}

LinkConstants compute_constants(const LinkSpec& link, double S, double L) {
  if (S <= 0.0 || L <= 0.0) throw std::invalid_argument("compute_constants: S and L must be positive");
  switch (link.kind) {
    case LinkKind::identity:
      return LinkConstants{1.0, 1.0, 1.0};
    case LinkKind::logistic: {
      // dmu is unimodal and symmetric: max at 0, min at the box edge |z|=S*L.
      const double k = logistic_dmu(0.0);
      const double c = logistic_dmu(S * L);
      return LinkConstants{k, c, k / c};
    }
  }
  return compute_constants_grid(link, S, L);
}

LinkConstants compute_constants_grid(const LinkSpec& link, double S, double L, int points) {
  if (S <= 0.0 || L <= 0.0) throw std::invalid_argument("compute_constants: S and L must be positive");
  if (points < 2) throw std::invalid_argument("compute_constants: need at least 2 grid points");
  if (points % 2 == 0) ++points;  // keep 0 and both endpoints on the grid
  const double zmax = S * L;
  double k = -std::numeric_limits<double>::infinity();
  double c = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double z = -zmax + 2.0 * zmax * static_cast<double>(i) / (points - 1);
    const double d = link.deriv(z);
    k = std::max(k, d);
    c = std::min(c, d);
  }
  if (c <= 0.0) throw std::domain_error("compute_constants: dmu not strictly positive over the box");
  return LinkConstants{k, c, k / c};
}

}  // namespace nsglb
