#include "nsglb/envs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsglb {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "rotating") return ScheduleKind::rotating;
  if (name == "piecewise_constant") return ScheduleKind::piecewise_constant;
  if (name == "stationary") return ScheduleKind::stationary;
  throw std::invalid_argument("unknown schedule kind \"" + name + "\"");
}

ArmMode arm_mode_from_string(const std::string& name) {
  if (name == "random_sphere") return ArmMode::random_sphere;
  if (name == "orthogonal") return ArmMode::orthogonal;
  throw std::invalid_argument("unknown arm mode \"" + name + "\"");
}

DriftSchedule DriftSchedule::rotating_default(long T, double radius) {
  DriftSchedule s;
  s.kind = ScheduleKind::rotating;
  s.T = T;
  s.d = 2;
  s.radius = radius;
  return s;
}

DriftSchedule DriftSchedule::stationary(long T, Vector theta) {
  DriftSchedule s;
  s.kind = ScheduleKind::stationary;
  s.T = T;
  s.d = static_cast<int>(theta.size());
  s.theta_fixed = std::move(theta);
  return s;
}

DriftSchedule DriftSchedule::piecewise(long T, std::vector<std::pair<long, Vector>> segments) {
  if (segments.empty() || segments.front().first != 1)
    throw std::invalid_argument("piecewise schedule: first segment must start at t=1");
  DriftSchedule s;
  s.kind = ScheduleKind::piecewise_constant;
  s.T = T;
  s.d = static_cast<int>(segments.front().second.size());
  s.segments = std::move(segments);
  return s;
}

Vector theta_star(const DriftSchedule& schedule, long t) {
  if (t < 1 || t > schedule.T) throw std::out_of_range("theta_star: t out of [1, T]");
  switch (schedule.kind) {
    case ScheduleKind::stationary:
      return schedule.theta_fixed;
    case ScheduleKind::piecewise_constant: {
      const Vector* cur = nullptr;
      for (const auto& [start, th] : schedule.segments) {
        if (start <= t) cur = &th;
      }
      return *cur;
    }
    case ScheduleKind::rotating: {
      if (schedule.d != 2) throw std::invalid_argument("rotating schedule requires d=2");
      const double third = static_cast<double>(schedule.T) / 3.0;
      double phi;
      const double td = static_cast<double>(t);
      if (td <= third) {
        phi = kPi / 2.0;
      } else if (td <= 2.0 * third) {
        phi = (kPi / 2.0) * (2.0 * third - td) / third;  // linear from pi/2 down to 0
      } else {
        phi = 0.0;
      }
      Vector th(2);
      th << schedule.radius * std::cos(phi), schedule.radius * std::sin(phi);
      return th;
    }
  }
  throw std::logic_error("theta_star: unreachable");
}

double variation_budget(const DriftSchedule& schedule) {
  double total = 0.0;
  Vector prev = theta_star(schedule, 1);
  for (long t = 2; t <= schedule.T; ++t) {
    Vector cur = theta_star(schedule, t);
    total += (cur - prev).norm();
    prev = std::move(cur);
  }
  return total;
}

EnvState::EnvState(DriftSchedule sched, ArmMode mode, int K_, double L_, LinkKind link_kind,
                   double sigma_, std::uint64_t seed, std::uint64_t seed_offset)
    : schedule(std::move(sched)),
      arm_mode(mode),
      K(K_),
      L(L_),
      link(make_link(link_kind)),
      sigma(sigma_),
      arm_rng(make_stream(seed + seed_offset, Stream::arms)),
      reward_rng(make_stream(seed + seed_offset, Stream::rewards)) {
  if (K < 1) throw std::invalid_argument("EnvState: K must be >= 1");
  if (L <= 0.0 || sigma <= 0.0) throw std::invalid_argument("EnvState: L and sigma must be > 0");
}

std::vector<Vector> draw_arms(EnvState& env) {
  const int d = env.schedule.d;
  std::vector<Vector> arms;
  if (env.arm_mode == ArmMode::orthogonal) {
    arms.reserve(d);
    for (int i = 0; i < d; ++i) {
      Vector x = Vector::Zero(d);
      x[i] = uniform_range(env.arm_rng, env.L / 2.0, env.L);
      arms.push_back(std::move(x));
    }
    return arms;
  }
  arms.reserve(env.K);
  for (int k = 0; k < env.K; ++k) {
    Vector x(d);
    if (d == 2) {
      const double angle = 2.0 * kPi * uniform01(env.arm_rng);
      x << env.L * std::cos(angle), env.L * std::sin(angle);
    } else {
      double norm = 0.0;
      do {
        for (int j = 0; j < d; ++j) x[j] = normal01(env.arm_rng);
        norm = x.norm();
      } while (norm == 0.0);
      x *= env.L / norm;
    }
    arms.push_back(std::move(x));
  }
  return arms;
}

double sample_reward(EnvState& env, const Vector& arm) {
  const Vector ts = theta_star(env.schedule, env.t);
  const double mean = env.link.eval(arm.dot(ts));
  const double u = uniform01(env.reward_rng);
  if (env.link.kind == LinkKind::logistic) return u < mean ? 1.0 : 0.0;
  // identity link: clipped mean plus symmetric truncated noise in [0, 2*sigma]
  const double hi = 2.0 * env.sigma;
  const double m = std::clamp(mean, 0.0, hi);
  const double amp = std::min({m, hi - m, env.sigma});
  return m + amp * (2.0 * u - 1.0);
}

double instantaneous_regret(const EnvState& env, const std::vector<Vector>& arm_set,
                            int chosen) {
  if (chosen < 0 || chosen >= static_cast<int>(arm_set.size()))
    throw std::out_of_range("instantaneous_regret: chosen index out of range");
  const Vector ts = theta_star(env.schedule, env.t);
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& x : arm_set) best = std::max(best, env.link.eval(x.dot(ts)));
  return best - env.link.eval(arm_set[chosen].dot(ts));
}

void advance(EnvState& env) { ++env.t; }

}  // namespace nsglb
