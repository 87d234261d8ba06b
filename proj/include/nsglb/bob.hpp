#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "nsglb/config.hpp"
#include "nsglb/envs.hpp"
#include "nsglb/projection.hpp"
#include "nsglb/records.hpp"
#include "nsglb/types.hpp"

namespace nsglb {

// EXP3 master over a geometric grid of discount factors.
struct Exp3State {
  std::vector<double> grid;       // gamma_j values
  std::vector<double> s_weights;  // initialized to 1
  double alpha = 1.0;
  long H = 1;             // block length
  long block_index = 0;   // completed blocks
  double sigma = 0.5;     // reward rescale: block sums lie in [0, 2*sigma*H]
};

// gamma_i = 1 - mu_i,  mu_i = (1/2) 2^(i-1) / (d^(2/3) T (2S)^(2/3)),
// N = ceil((2/3) log2(2 S T^(3/2))) + 1; entries with mu_i >= 1 are dropped.
std::vector<double> make_grid(double S, int d, long T);

Exp3State make_exp3(std::vector<double> grid, long T, long H, double sigma);

// p_j = (1 - alpha) s_j / sum(s) + alpha / N.
std::vector<double> exp3_probabilities(const Exp3State& state);

// Draw an index from the current probabilities (one uniform consumed).
int exp3_sample(const Exp3State& state, std::mt19937_64& rng);

// s_j *= exp( alpha / (N p_j) * block_reward_sum / (2 sigma H) ).
void exp3_update(Exp3State& state, int chosen_j, double block_reward_sum);

struct BobOptions {
  std::optional<long> H;                         // default floor(d sqrt(T))
  std::optional<std::vector<double>> grid_override;
  ProjectionOptions projection;
};

struct BobBlock {
  int chosen = 0;
  double gamma = 0.0;
  std::vector<double> probabilities;  // at selection time
  double reward_sum = 0.0;
  long rounds = 0;
};

struct BobRunResult {
  std::vector<RoundRecord> records;
  std::vector<BobBlock> blocks;
  long H = 0;
  double alpha = 0.0;
  std::vector<double> grid;
};

// Algorithm: split the horizon into ceil(T/H) blocks; per block draw gamma_j
// from EXP3, run a FRESH BVD-GLM-UCB worker for min(H, remaining) rounds on
// the ongoing environment, then feed the block's raw reward sum back. EXP3
// randomness comes from its own stream of `seed`, independent of the
// environment streams.
BobRunResult run_bob(const ProblemConfig& config, EnvState& env, std::uint64_t seed,
                     const BobOptions& opts = {});

}  // namespace nsglb
