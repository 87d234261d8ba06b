#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nsglb/link.hpp"
#include "nsglb/rng.hpp"
#include "nsglb/types.hpp"

namespace nsglb {

enum class ScheduleKind { rotating, piecewise_constant, stationary };
enum class ArmMode { random_sphere, orthogonal };

ScheduleKind schedule_kind_from_string(const std::string& name);
ArmMode arm_mode_from_string(const std::string& name);

// The hidden parameter path theta*_t. The rotating schedule is the
// two-dimensional drift of the experiment section: hold (0,1) for the first
// third of the horizon, rotate linearly down to (1,0) over the middle third,
// hold (1,0) afterwards.
struct DriftSchedule {
  ScheduleKind kind = ScheduleKind::rotating;
  long T = 1000;
  int d = 2;
  double radius = 1.0;                              // rotating: ||theta*_t|| exactly
  Vector theta_fixed;                               // stationary
  std::vector<std::pair<long, Vector>> segments;    // piecewise_constant: (start_t, theta)

  static DriftSchedule rotating_default(long T, double radius = 1.0);
  static DriftSchedule stationary(long T, Vector theta);
  static DriftSchedule piecewise(long T, std::vector<std::pair<long, Vector>> segments);
};

// theta*_t for 1 <= t <= T.
Vector theta_star(const DriftSchedule& schedule, long t);

// B_T = sum_{t=1}^{T-1} || theta*_{t+1} - theta*_t ||_2, by direct summation.
double variation_budget(const DriftSchedule& schedule);

// One simulated world: schedule plus arm generator plus reward noise.
// Policies never see this object; regret is computed by the harness.
//
// Exactly one uniform is consumed per reward draw, so two policies replaying
// the same seed face identical noise regardless of which arms they pick
// (common random numbers).
struct EnvState {
  DriftSchedule schedule;
  ArmMode arm_mode = ArmMode::random_sphere;
  int K = 10;       // arms per round (random_sphere; orthogonal always emits d)
  double L = 1.0;   // arm norm bound (sphere radius / orthogonal amplitude cap)
  LinkSpec link;
  double sigma = 0.5;
  std::mt19937_64 arm_rng;
  std::mt19937_64 reward_rng;
  long t = 1;

  EnvState(DriftSchedule sched, ArmMode mode, int K, double L, LinkKind link_kind,
           double sigma, std::uint64_t seed, std::uint64_t seed_offset = 0);
};

// The round-t arm set; consumes the arm stream only.
std::vector<Vector> draw_arms(EnvState& env);

// Stochastic reward of an arm at the current round. Logistic worlds draw
// Bernoulli(mu(<x, theta*_t>)) (so 2*sigma = 1); identity worlds return the
// clipped mean plus symmetric truncated noise, always inside [0, 2*sigma].
double sample_reward(EnvState& env, const Vector& arm);

// mu(<x*, theta*_t>) - mu(<chosen, theta*_t>) against the round's best arm.
double instantaneous_regret(const EnvState& env, const std::vector<Vector>& arm_set,
                            int chosen);

// Advance to the next round (call after the round's reward draw).
void advance(EnvState& env);

}  // namespace nsglb
