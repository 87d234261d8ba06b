#pragma once

#include <stdexcept>

namespace nsglb {

// The scalar hyperparameters of one bandit problem. Single source of truth:
// policies, projection and the harness all read these fields rather than
// carrying private copies.
struct ProblemConfig {
  int d = 2;            // ambient dimension
  double S = 1.0;       // admissible-parameter radius, ||theta*|| <= S
  double L = 1.0;       // arm-norm bound
  double sigma = 0.5;   // reward half-range: rewards in [0, 2*sigma]
  double lambda = 1.0;  // ridge regularization
  double gamma = 0.99;  // discount in (0,1]; 1 means no forgetting
  double delta = 0.1;   // confidence level
  long T = 1000;        // horizon

  void validate() const {
    if (d < 1) throw std::invalid_argument("config: d must be >= 1");
    if (S <= 0.0) throw std::invalid_argument("config: S must be > 0");
    if (L <= 0.0) throw std::invalid_argument("config: L must be > 0");
    if (sigma <= 0.0) throw std::invalid_argument("config: sigma must be > 0");
    if (lambda <= 0.0) throw std::invalid_argument("config: lambda must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("config: gamma must be in (0,1]");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("config: delta must be in (0,1]");
    if (T < 1) throw std::invalid_argument("config: T must be >= 1");
  }
};

}  // namespace nsglb
