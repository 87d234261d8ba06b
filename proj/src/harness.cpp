#include "nsglb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace nsglb {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const char* section,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument(std::string("config: unknown key \"") + key + "\" in " +
                                  section);
  }
}

Vector parse_vector(const json& arr) {
  if (!arr.is_array() || arr.empty())
    throw std::invalid_argument("config: expected a non-empty array of numbers");
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
  return v;
}

int thread_pool_width(std::size_t n_tasks) {
  unsigned width = std::thread::hardware_concurrency();
  if (width == 0) width = 1;
  if (const char* env = std::getenv("NONSTAT_GLB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) width = static_cast<unsigned>(cap);
  }
  return static_cast<int>(std::min<std::size_t>(width, n_tasks));
}

}  // namespace

DriftSchedule ExperimentConfig::schedule() const {
  switch (env_kind) {
    case ScheduleKind::rotating:
      return DriftSchedule::rotating_default(T, radius);
    case ScheduleKind::stationary:
      return DriftSchedule::stationary(T, theta_fixed);
    case ScheduleKind::piecewise_constant:
      return DriftSchedule::piecewise(T, segments);
  }
  throw std::logic_error("schedule: unreachable");
}

ProblemConfig ExperimentConfig::problem(double gamma) const {
  ProblemConfig p;
  p.d = d;
  p.S = S;
  p.L = L;
  p.sigma = sigma;
  p.lambda = lambda;
  p.gamma = gamma;
  p.delta = delta;
  p.T = T;
  p.validate();
  return p;
}

double ExperimentConfig::resolve_gamma(const PolicySelection& sel) const {
  if (sel.gamma) {
    if (!(*sel.gamma > 0.0 && *sel.gamma < 1.0))
      throw std::invalid_argument("config: explicit policy gamma must be in (0,1)");
    return *sel.gamma;
  }
  const double budget = variation_budget(schedule());
  if (budget <= 0.0) return 1.0 - 1e-6;  // stationary world: tune_gamma limit
  return tune_gamma(budget, d, T, sel.tune_mode);
}

std::string config_hash(const json& j) {
  const std::string dump = j.dump();  // nlohmann objects iterate sorted by key
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  reject_unknown_keys(j, "top level",
                      {"schema_version", "env", "problem", "policies", "projection", "bob",
                       "seeds", "out_dir"});
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
    throw std::invalid_argument("config: schema_version must be 1");

  const json& env = j.at("env");
  reject_unknown_keys(env, "env",
                      {"kind", "T", "d", "K", "arm_mode", "link", "seed_offset", "radius",
                       "theta", "segments"});
  cfg.env_kind = schedule_kind_from_string(env.at("kind").get<std::string>());
  cfg.T = env.at("T").get<long>();
  cfg.d = env.value("d", 2);
  cfg.K = env.value("K", 10);
  if (env.contains("arm_mode")) cfg.arm_mode = arm_mode_from_string(env.at("arm_mode").get<std::string>());
  if (env.contains("link")) cfg.link = link_kind_from_string(env.at("link").get<std::string>());
  cfg.seed_offset = env.value("seed_offset", 0ULL);
  cfg.radius = env.value("radius", 1.0);
  if (cfg.env_kind == ScheduleKind::stationary) {
    if (!env.contains("theta")) throw std::invalid_argument("config: stationary env needs theta");
    cfg.theta_fixed = parse_vector(env.at("theta"));
    cfg.d = static_cast<int>(cfg.theta_fixed.size());
  }
  if (cfg.env_kind == ScheduleKind::piecewise_constant) {
    if (!env.contains("segments"))
      throw std::invalid_argument("config: piecewise_constant env needs segments");
    for (const json& seg : env.at("segments")) {
      reject_unknown_keys(seg, "segments entry", {"start", "theta"});
      cfg.segments.emplace_back(seg.at("start").get<long>(), parse_vector(seg.at("theta")));
    }
    cfg.d = static_cast<int>(cfg.segments.front().second.size());
  }

  if (j.contains("problem")) {
    const json& pr = j.at("problem");
    reject_unknown_keys(pr, "problem", {"S", "L", "sigma", "lambda", "delta"});
    cfg.S = pr.value("S", cfg.S);
    cfg.L = pr.value("L", cfg.L);
    cfg.sigma = pr.value("sigma", cfg.sigma);
    cfg.lambda = pr.value("lambda", cfg.lambda);
    cfg.delta = pr.value("delta", cfg.delta);
  }

  if (!j.contains("policies") || !j.at("policies").is_array() || j.at("policies").empty())
    throw std::invalid_argument("config: policies must be a non-empty array");
  for (const json& pj : j.at("policies")) {
    reject_unknown_keys(pj, "policies entry", {"kind", "gamma", "tune_mode", "label"});
    PolicySelection sel;
    sel.kind = policy_kind_from_string(pj.at("kind").get<std::string>());
    if (pj.contains("gamma") && !pj.at("gamma").is_string())
      sel.gamma = pj.at("gamma").get<double>();
    else if (pj.contains("gamma") && pj.at("gamma").get<std::string>() != "auto")
      throw std::invalid_argument("config: policy gamma must be a number or \"auto\"");
    if (pj.contains("tune_mode")) {
      const std::string mode = pj.at("tune_mode").get<std::string>();
      if (mode == "orthogonal")
        sel.tune_mode = TuneMode::orthogonal;
      else if (mode == "general")
        sel.tune_mode = TuneMode::general;
      else
        throw std::invalid_argument("config: tune_mode must be orthogonal or general");
    }
    sel.label = pj.value("label", to_string(sel.kind));
    cfg.policies.push_back(std::move(sel));
  }

  if (j.contains("projection")) {
    const json& pj = j.at("projection");
    reject_unknown_keys(pj, "projection", {"tol", "max_iters"});
    cfg.projection.tol = pj.value("tol", cfg.projection.tol);
    cfg.projection.max_iters = pj.value("max_iters", cfg.projection.max_iters);
    if (cfg.projection.tol <= 0.0 || cfg.projection.max_iters < 1)
      throw std::invalid_argument("config: bad projection solver settings");
  }

  if (j.contains("bob")) {
    const json& bj = j.at("bob");
    reject_unknown_keys(bj, "bob", {"H", "grid_override"});
    if (bj.contains("H") && !bj.at("H").is_string())
      cfg.bob.H = bj.at("H").get<long>();
    else if (bj.contains("H") && bj.at("H").get<std::string>() != "auto")
      throw std::invalid_argument("config: bob.H must be an integer or \"auto\"");
    if (bj.contains("grid_override"))
      cfg.bob.grid_override = bj.at("grid_override").get<std::vector<double>>();
  }

  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty())
    throw std::invalid_argument("config: seeds must be a non-empty array");
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.out_dir = j.value("out_dir", cfg.out_dir);

  // scalar constraints (the per-policy gamma is validated on resolve)
  cfg.problem(0.5);
  if (cfg.K < 1) throw std::invalid_argument("config: K must be >= 1");

  cfg.hash = config_hash(j);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

RunOutput run_single(const ExperimentConfig& config, const PolicySelection& sel,
                     std::uint64_t seed) {
  const double gamma = config.resolve_gamma(sel);
  const ProblemConfig prob = config.problem(gamma);
  EnvState env(config.schedule(), config.arm_mode, config.K, config.L, config.link,
               config.sigma, seed, config.seed_offset);

  std::unique_ptr<GlbUcbPolicy> policy =
      sel.kind == PolicyKind::bvd_glm_ucb
          ? make_bvd(prob, config.link, config.projection, sel.label)
          : make_baseline(sel.kind, prob, config.link, config.projection);

  RunOutput out;
  out.records.reserve(config.T);
  double cum = 0.0;
  for (long t = 1; t <= config.T; ++t) {
    const std::vector<Vector> arms = draw_arms(env);
    const int chosen = policy->choose(arms);
    const double reward = sample_reward(env, arms[chosen]);
    const double regret = instantaneous_regret(env, arms, chosen);
    policy->observe(arms[chosen], reward);
    cum += regret;

    RoundRecord rec;
    rec.seed = seed;
    rec.t = t;
    rec.algo = sel.label;
    rec.arm = chosen;
    rec.reward = reward;
    rec.regret = regret;
    rec.cum_regret = cum;
    rec.theta_hat_norm = policy->theta_estimate().norm();
    rec.outside_theta = rec.theta_hat_norm > config.S ? 1 : 0;
    out.records.push_back(std::move(rec));
    advance(env);
  }
  out.projection_calls = policy->projection_calls();
  out.fast_path_count = policy->fast_path_count();
  out.invariant_violations = policy->invariant_violations();
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool quiet) {
  struct Task {
    std::uint64_t seed;
    std::size_t policy_index;
  };
  std::vector<Task> tasks;
  for (std::uint64_t seed : config.seeds)
    for (std::size_t p = 0; p < config.policies.size(); ++p) tasks.push_back({seed, p});

  std::vector<RunOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  const int width = thread_pool_width(tasks.size());
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) break;
      try {
        outputs[i] = run_single(config, config.policies[tasks[i].policy_index], tasks[i].seed);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        failed.store(true);
        if (error_message.empty()) error_message = e.what();
      }
    }
  };
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < width; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error("run failed: " + error_message);

  ExperimentResult result;
  result.hash = config.hash;
  result.checkpoints = {std::max(1L, config.T / 4), std::max(1L, config.T / 2),
                        std::max(1L, 3 * config.T / 4), config.T};

  // canonical order: seed-major, then policy in config order
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const RunOutput& ro = outputs[i];
    result.rows.insert(result.rows.end(), ro.records.begin(), ro.records.end());
    RunOutput stats;
    stats.projection_calls = ro.projection_calls;
    stats.fast_path_count = ro.fast_path_count;
    stats.invariant_violations = ro.invariant_violations;
    result.per_run_stats[std::to_string(tasks[i].seed) + "/" +
                         config.policies[tasks[i].policy_index].label] = std::move(stats);
  }

  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    PolicySummary summary;
    summary.name = config.policies[p].label;
    for (long ckpt : result.checkpoints) {
      double mean = 0.0;
      std::vector<double> values;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].policy_index != p) continue;
        values.push_back(outputs[i].records[ckpt - 1].cum_regret);
      }
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
      summary.mean_cum_regret.push_back(mean);
      summary.std_cum_regret.push_back(sd);
    }
    result.summaries.push_back(std::move(summary));
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    write_csv(config.out_dir + "/rounds.csv", result.rows);
    std::ofstream out(config.out_dir + "/summary.json");
    if (!out) throw std::runtime_error("cannot write summary.json under " + config.out_dir);
    out << summary_json(config, result).dump(2) << '\n';
  }
  if (!quiet) {
    for (const PolicySummary& s : result.summaries)
      std::cout << s.name << ": mean cum regret at T = " << s.mean_cum_regret.back() << "\n";
  }
  return result;
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  json out;
  out["schema_version"] = 1;
  out["config_hash"] = result.hash;
  out["seeds"] = config.seeds.size();
  out["checkpoints"] = result.checkpoints;
  json policies = json::object();
  for (const PolicySummary& s : result.summaries) {
    policies[s.name] = {{"mean_cum_regret", s.mean_cum_regret},
                        {"std_cum_regret", s.std_cum_regret}};
  }
  out["policies"] = policies;
  return out;
}

}  // namespace nsglb
