#include "nsglb/records.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nsglb {

namespace {
// %.17g round-trips doubles exactly, so re-running a config reproduces the
// file byte for byte.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string to_csv_row(const RoundRecord& r) {
  std::string row;
  row += std::to_string(r.seed);
  row += ',';
  row += std::to_string(r.t);
  row += ',';
  row += r.algo;
  row += ',';
  row += std::to_string(r.arm);
  row += ',';
  row += fmt(r.reward);
  row += ',';
  row += fmt(r.regret);
  row += ',';
  row += fmt(r.cum_regret);
  row += ',';
  row += fmt(r.theta_hat_norm);
  row += ',';
  row += std::to_string(r.outside_theta);
  return row;
}

void write_csv(const std::string& path, const std::vector<RoundRecord>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kCsvHeader << '\n';
  for (const RoundRecord& r : rows) out << to_csv_row(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace nsglb
