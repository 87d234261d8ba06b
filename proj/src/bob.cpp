#include "nsglb/bob.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nsglb/policies.hpp"

namespace nsglb {

std::vector<double> make_grid(double S, int d, long T) {
  if (S <= 0.0) throw std::invalid_argument("make_grid: S must be > 0");
  if (T < 2) throw std::invalid_argument("make_grid: T must be >= 2");
  const long N = static_cast<long>(
                     std::ceil((2.0 / 3.0) * std::log2(2.0 * S * std::pow(static_cast<double>(T), 1.5)))) +
                 1;
  std::vector<double> grid;
  grid.reserve(N);
  const double base = 0.5 / (std::pow(static_cast<double>(d), 2.0 / 3.0) *
                             static_cast<double>(T) * std::pow(2.0 * S, 2.0 / 3.0));
  for (long i = 1; i <= N; ++i) {
    const double mu_i = base * std::pow(2.0, static_cast<double>(i - 1));
    if (mu_i >= 1.0) continue;  // gamma would leave (0,1)
    grid.push_back(1.0 - mu_i);
  }
  return grid;
}

Exp3State make_exp3(std::vector<double> grid, long T, long H, double sigma) {
  if (grid.empty()) throw std::invalid_argument("make_exp3: empty grid");
  if (H < 1) throw std::invalid_argument("make_exp3: H must be >= 1");
  Exp3State st;
  st.grid = std::move(grid);
  st.s_weights.assign(st.grid.size(), 1.0);
  const double N = static_cast<double>(st.grid.size());
  const double blocks = std::ceil(static_cast<double>(T) / static_cast<double>(H));
  st.alpha = std::min(1.0, std::sqrt(N * std::log(N) / ((std::exp(1.0) - 1.0) * blocks)));
  st.H = H;
  st.sigma = sigma;
  return st;
}

std::vector<double> exp3_probabilities(const Exp3State& state) {
  const std::size_t N = state.s_weights.size();
  const double total = std::accumulate(state.s_weights.begin(), state.s_weights.end(), 0.0);
  std::vector<double> p(N);
  for (std::size_t j = 0; j < N; ++j)
    p[j] = (1.0 - state.alpha) * state.s_weights[j] / total + state.alpha / static_cast<double>(N);
  return p;
}

int exp3_sample(const Exp3State& state, std::mt19937_64& rng) {
  const std::vector<double> p = exp3_probabilities(state);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    acc += p[j];
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(p.size()) - 1;
}

void exp3_update(Exp3State& state, int chosen_j, double block_reward_sum) {
  if (chosen_j < 0 || chosen_j >= static_cast<int>(state.s_weights.size()))
    throw std::out_of_range("exp3_update: index out of range");
  const double cap = 2.0 * state.sigma * static_cast<double>(state.H);
  if (block_reward_sum < 0.0 || block_reward_sum > cap * (1.0 + 1e-12))
    throw std::domain_error("exp3_update: block reward sum outside [0, 2*sigma*H]");
  const double N = static_cast<double>(state.s_weights.size());
  const double p_j = exp3_probabilities(state)[chosen_j];
  state.s_weights[chosen_j] *=
      std::exp(state.alpha / (N * p_j) * block_reward_sum / cap);
  ++state.block_index;
}

BobRunResult run_bob(const ProblemConfig& config, EnvState& env, std::uint64_t seed,
                     const BobOptions& opts) {
  config.validate();
  const long T = config.T;
  const long H = opts.H.value_or(
      static_cast<long>(std::floor(config.d * std::sqrt(static_cast<double>(T)))));
  if (H < 1) throw std::invalid_argument("run_bob: H must be >= 1");

  std::vector<double> grid =
      opts.grid_override ? *opts.grid_override : make_grid(config.S, config.d, T);
  Exp3State exp3 = make_exp3(std::move(grid), T, H, config.sigma);
  std::mt19937_64 master_rng = make_stream(seed, Stream::exp3);

  BobRunResult result;
  result.H = H;
  result.alpha = exp3.alpha;
  result.grid = exp3.grid;

  double cum_regret = 0.0;
  long played = 0;
  const long n_blocks = (T + H - 1) / H;
  for (long i = 0; i < n_blocks; ++i) {
    BobBlock block;
    block.probabilities = exp3_probabilities(exp3);
    block.chosen = exp3_sample(exp3, master_rng);
    block.gamma = exp3.grid[block.chosen];

    // fresh worker each block, as the meta-algorithm specifies
    ProblemConfig worker_cfg = config;
    worker_cfg.gamma = block.gamma;
    auto worker = make_bvd(worker_cfg, env.link.kind, opts.projection);

    const long rounds = std::min(H, T - played);
    for (long r = 0; r < rounds; ++r) {
      const std::vector<Vector> arms = draw_arms(env);
      const int chosen = worker->choose(arms);
      const double reward = sample_reward(env, arms[chosen]);
      const double regret = instantaneous_regret(env, arms, chosen);
      worker->observe(arms[chosen], reward);
      block.reward_sum += reward;
      cum_regret += regret;
      ++played;

      RoundRecord rec;
      rec.seed = seed;
      rec.t = played;
      rec.algo = "bob_bvd_glm_ucb";
      rec.arm = chosen;
      rec.reward = reward;
      rec.regret = regret;
      rec.cum_regret = cum_regret;
      rec.theta_hat_norm = worker->theta_estimate().norm();
      rec.outside_theta = rec.theta_hat_norm > config.S ? 1 : 0;
      result.records.push_back(std::move(rec));
      advance(env);
    }
    block.rounds = rounds;
    exp3_update(exp3, block.chosen, block.reward_sum);
    result.blocks.push_back(std::move(block));
  }
  return result;
}

}  // namespace nsglb
