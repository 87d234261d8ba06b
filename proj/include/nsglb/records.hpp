#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nsglb {

// One row of the per-round CSV log.
struct RoundRecord {
  std::uint64_t seed = 0;
  long t = 0;
  std::string algo;
  int arm = 0;
  double reward = 0.0;
  double regret = 0.0;
  double cum_regret = 0.0;
  double theta_hat_norm = 0.0;
  int outside_theta = 0;  // 1 when ||theta_hat|| > S after the round's refit
};

// Fixed column set, bit-exact header string.
inline const char* kCsvHeader = "seed,t,algo,arm,reward,regret,cum_regret,theta_hat_norm,outside_theta";

std::string to_csv_row(const RoundRecord& r);

void write_csv(const std::string& path, const std::vector<RoundRecord>& rows);

}  // namespace nsglb
