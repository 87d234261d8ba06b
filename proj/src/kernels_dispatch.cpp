#include "nsglb/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace nsglb::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend pick_default() {
  if (const char* env = std::getenv("NSGLB_KERNEL")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2") {
      if (!cpu_has_avx2()) throw std::runtime_error("NSGLB_KERNEL=avx2 but CPU lacks AVX2/FMA");
      return Backend::avx2;
    }
    throw std::runtime_error("NSGLB_KERNEL must be \"scalar\" or \"avx2\"");
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
  static Backend b = pick_default();
  return b;
}

}  // namespace

Backend active_backend() { return current(); }

bool backend_supported(Backend b) {
  return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

void force_backend(Backend b) {
  if (!backend_supported(b)) throw std::runtime_error("kernel backend not supported on this CPU");
  current() = b;
}

std::string to_string(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

void mu_weighted_sum(const HistoryView& h, LinkKind link, const double* theta, double* out_g) {
#if defined(__x86_64__) || defined(_M_X64)
  if (current() == Backend::avx2) {
    detail::mu_weighted_sum_avx2(h, link, theta, out_g);
    return;
  }
#endif
  detail::mu_weighted_sum_scalar(h, link, theta, out_g);
}

void mu_weighted_sum_jac(const HistoryView& h, LinkKind link, const double* theta,
                         double* out_g, double* out_hess) {
#if defined(__x86_64__) || defined(_M_X64)
  if (current() == Backend::avx2) {
    detail::mu_weighted_sum_jac_avx2(h, link, theta, out_g, out_hess);
    return;
  }
#endif
  detail::mu_weighted_sum_jac_scalar(h, link, theta, out_g, out_hess);
}

double qmle_loss(const HistoryView& h, LinkKind link, const double* theta) {
#if defined(__x86_64__) || defined(_M_X64)
  if (current() == Backend::avx2) return detail::qmle_loss_avx2(h, link, theta);
#endif
  return detail::qmle_loss_scalar(h, link, theta);
}

}  // namespace nsglb::kernels
