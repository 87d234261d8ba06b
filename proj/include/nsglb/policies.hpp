#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsglb/config.hpp"
#include "nsglb/design.hpp"
#include "nsglb/estimator.hpp"
#include "nsglb/link.hpp"
#include "nsglb/projection.hpp"
#include "nsglb/types.hpp"

namespace nsglb {

enum class PolicyKind { bvd_glm_ucb, glm_ucb, oful, d_linucb };
enum class TuneMode { orthogonal, general };

PolicyKind policy_kind_from_string(const std::string& name);
std::string to_string(PolicyKind kind);

// Discount recommended by the regret analysis, clamped to [0.5, 1 - 1e-6].
//   orthogonal arm sets: 1 - (B_T / (d T))^(2/3)
//   general geometry:    1 - (B_T / (sqrt(d) T))^(2/5)
double tune_gamma(double B_T, int d, long T, TuneMode mode);

// Deterministic sequential policy: choose is a pure function of the internal
// state and the offered arm set (ties broken by lowest index), observe
// consumes exactly one (arm, reward) pair and advances the round counter.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const std::string& name() const = 0;
  virtual int choose(const std::vector<Vector>& arm_set) const = 0;
  virtual void observe(const Vector& arm, double reward) = 0;
  virtual long round() const = 0;
  virtual const Vector& theta_estimate() const = 0;    // current theta_hat
  virtual const Vector& theta_admissible() const = 0;  // parameter used to predict
  virtual double bonus_scale() const = 0;              // current bonus multiplier
};

// One machine covers BVD-GLM-UCB and the three baselines of the experiment
// section; they differ only in link, discount, bonus metric and projector.
struct GlbUcbOptions {
  LinkKind link = LinkKind::logistic;
  enum class Bonus {
    glm,           // 2 R_mu beta ||x||_{V^-1}
    lin,           // beta ||x||_{V^-1}
    lin_weighted,  // beta ||x||_{V^-1 Vtilde V^-1}
  } bonus = Bonus::glm;
  enum class Projector { joint, ball, none } projector = Projector::joint;
  ProjectionOptions projection;
};

class GlbUcbPolicy : public Policy {
 public:
  GlbUcbPolicy(std::string name, const ProblemConfig& config, const GlbUcbOptions& opts);

  const std::string& name() const override { return name_; }
  int choose(const std::vector<Vector>& arm_set) const override;
  void observe(const Vector& arm, double reward) override;
  long round() const override { return state_.t(); }
  const Vector& theta_estimate() const override { return theta_hat_; }
  const Vector& theta_admissible() const override { return theta_tilde_; }
  double bonus_scale() const override;

  // introspection (diagnostics / acceptance)
  const DiscountedState& state() const { return state_; }
  const LinkSpec& link() const { return link_; }
  const LinkConstants& constants() const { return consts_; }
  const ConfidenceRadius& radius() const { return beta_; }
  const QmleResult& last_fit() const { return last_fit_; }
  const std::optional<ProjectionOutcome>& last_projection() const { return last_projection_; }
  long projection_calls() const { return projection_calls_; }
  long fast_path_count() const { return fast_path_count_; }
  long invariant_violations() const { return invariant_violations_; }

 private:
  std::string name_;
  ProblemConfig config_;
  GlbUcbOptions opts_;
  LinkSpec link_;
  LinkConstants consts_;
  DiscountedState state_;
  Vector theta_hat_;
  Vector theta_tilde_;
  ConfidenceRadius beta_;
  QmleResult last_fit_;
  std::optional<ProjectionOutcome> last_projection_;
  long projection_calls_ = 0;
  long fast_path_count_ = 0;
  long invariant_violations_ = 0;
};

// BVD-GLM-UCB with the discount taken from config.gamma.
std::unique_ptr<GlbUcbPolicy> make_bvd(const ProblemConfig& config, LinkKind link,
                                       const ProjectionOptions& popts = {},
                                       const std::string& name = "bvd_glm_ucb");

// Baselines: glm_ucb (gamma = 1, env link, ball projection), oful (gamma = 1,
// identity link), d_linucb (identity link, discounted, weighted bonus; uses
// config.gamma).
std::unique_ptr<GlbUcbPolicy> make_baseline(PolicyKind kind, const ProblemConfig& config,
                                            LinkKind env_link,
                                            const ProjectionOptions& popts = {});

}  // namespace nsglb
