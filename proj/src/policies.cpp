#include "nsglb/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsglb {

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "bvd_glm_ucb") return PolicyKind::bvd_glm_ucb;
  if (name == "glm_ucb") return PolicyKind::glm_ucb;
  if (name == "oful") return PolicyKind::oful;
  if (name == "d_linucb") return PolicyKind::d_linucb;
  throw std::invalid_argument("unknown policy kind \"" + name + "\"");
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::bvd_glm_ucb: return "bvd_glm_ucb";
    case PolicyKind::glm_ucb: return "glm_ucb";
    case PolicyKind::oful: return "oful";
    case PolicyKind::d_linucb: return "d_linucb";
  }
  return "?";
}

double tune_gamma(double B_T, int d, long T, TuneMode mode) {
  if (B_T <= 0.0) throw std::invalid_argument("tune_gamma: B_T must be > 0");
  if (T < 1) throw std::invalid_argument("tune_gamma: T must be >= 1");
  double g;
  if (mode == TuneMode::orthogonal) {
    g = 1.0 - std::pow(B_T / (static_cast<double>(d) * T), 2.0 / 3.0);
  } else {
    g = 1.0 - std::pow(B_T / (std::sqrt(static_cast<double>(d)) * T), 2.0 / 5.0);
  }
  return std::clamp(g, 0.5, 1.0 - 1e-6);
}

GlbUcbPolicy::GlbUcbPolicy(std::string name, const ProblemConfig& config,
                           const GlbUcbOptions& opts)
    : name_(std::move(name)),
      config_(config),
      opts_(opts),
      link_(make_link(opts.link)),
      consts_(compute_constants(link_, config.S, config.L)),
      state_(config.d, config.lambda, config.gamma, config.L, 2.0 * config.sigma),
      theta_hat_(Vector::Zero(config.d)),
      theta_tilde_(Vector::Zero(config.d)) {
  config_.validate();
  beta_ = beta_radius(state_.t(), config_, consts_.c_mu);
}

double GlbUcbPolicy::bonus_scale() const {
  return opts_.bonus == GlbUcbOptions::Bonus::glm ? 2.0 * consts_.r_mu * beta_.beta
                                                  : beta_.beta;
}

int GlbUcbPolicy::choose(const std::vector<Vector>& arm_set) const {
  if (arm_set.empty()) throw std::invalid_argument("choose: empty arm set");
  const double scale = bonus_scale();
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(arm_set.size()); ++i) {
    const Vector& x = arm_set[i];
    if (x.size() != config_.d) throw std::invalid_argument("choose: arm dimension mismatch");
    if (x.norm() > config_.L * (1.0 + 1e-12))
      throw std::domain_error("choose: arm norm exceeds L");
    double width;
    switch (opts_.bonus) {
      case GlbUcbOptions::Bonus::lin_weighted:
        width = state_.mahalanobis_inv_tilde_inv(x);
        break;
      default:
        width = state_.mahalanobis_inv(x);
    }
    const double score = link_.eval(x.dot(theta_tilde_)) + scale * width;
    if (score > best_score) {  // strict: ties keep the lowest index
      best_score = score;
      best = i;
    }
  }
  return best;
}

void GlbUcbPolicy::observe(const Vector& arm, double reward) {
  state_.update(arm, reward);
  last_fit_ = fit_qmle(state_, link_, consts_.c_mu, theta_hat_);
  theta_hat_ = last_fit_.theta_hat;
  beta_ = beta_radius(state_.t(), config_, consts_.c_mu);

  switch (opts_.projector) {
    case GlbUcbOptions::Projector::joint: {
      ProjectionOutcome outcome = project(state_, link_, consts_.c_mu, theta_hat_,
                                          beta_.beta, config_.S, opts_.projection);
      ++projection_calls_;
      if (outcome.fast_path) ++fast_path_count_;
      if (!outcome.cert_ok || outcome.theta_tilde.norm() > config_.S * (1.0 + 1e-9) ||
          outcome.eta.norm() > 1.0 + 1e-9 || !outcome.monotone)
        ++invariant_violations_;
      theta_tilde_ = outcome.theta_tilde;
      last_projection_ = std::move(outcome);
      break;
    }
    case GlbUcbOptions::Projector::ball: {
      BallProjectionOutcome outcome = project_ball(state_, link_, consts_.c_mu, theta_hat_, config_.S,
                                     opts_.projection);
      ++projection_calls_;
      if (outcome.fast_path) ++fast_path_count_;
      if (outcome.theta_tilde.norm() > config_.S * (1.0 + 1e-9)) ++invariant_violations_;
      theta_tilde_ = outcome.theta_tilde;
      last_projection_.reset();
      break;
    }
    case GlbUcbOptions::Projector::none:
      theta_tilde_ = theta_hat_;
      last_projection_.reset();
      break;
  }
}

std::unique_ptr<GlbUcbPolicy> make_bvd(const ProblemConfig& config, LinkKind link,
                                       const ProjectionOptions& popts, const std::string& name) {
  GlbUcbOptions opts;
  opts.link = link;
  opts.bonus = GlbUcbOptions::Bonus::glm;
  opts.projector = GlbUcbOptions::Projector::joint;
  opts.projection = popts;
  return std::make_unique<GlbUcbPolicy>(name, config, opts);
}

std::unique_ptr<GlbUcbPolicy> make_baseline(PolicyKind kind, const ProblemConfig& config,
                                            LinkKind env_link, const ProjectionOptions& popts) {
  ProblemConfig cfg = config;
  GlbUcbOptions opts;
  opts.projection = popts;
  switch (kind) {
    case PolicyKind::bvd_glm_ucb:
      return make_bvd(config, env_link, popts);
    case PolicyKind::glm_ucb:
      cfg.gamma = 1.0;  // no forgetting; Vtilde = V
      opts.link = env_link;
      opts.bonus = GlbUcbOptions::Bonus::glm;
      opts.projector = GlbUcbOptions::Projector::ball;
      break;
    case PolicyKind::oful:
      cfg.gamma = 1.0;
      opts.link = LinkKind::identity;
      opts.bonus = GlbUcbOptions::Bonus::lin;
      opts.projector = GlbUcbOptions::Projector::none;
      break;
    case PolicyKind::d_linucb:
      opts.link = LinkKind::identity;  // discounted ridge, gamma from config
      opts.bonus = GlbUcbOptions::Bonus::lin_weighted;
      opts.projector = GlbUcbOptions::Projector::none;
      break;
  }
  return std::make_unique<GlbUcbPolicy>(to_string(kind), cfg, opts);
}

}  // namespace nsglb
