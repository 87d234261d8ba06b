#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nsglb/harness.hpp"

using namespace nsglb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal_config(long T = 10, int seeds = 1) {
  json j = {
      {"schema_version", 1},
      {"env", {{"kind", "rotating"}, {"T", T}, {"d", 2}, {"K", 5}, {"link", "logistic"}}},
      {"problem", {{"S", 1.0}, {"L", 1.0}, {"sigma", 0.5}, {"lambda", 1.0}, {"delta", 0.1}}},
      {"policies", json::array({{{"kind", "bvd_glm_ucb"}}})},
      {"seeds", json::array()},
      {"out_dir", ""},
  };
  for (int s = 0; s < seeds; ++s) j["seeds"].push_back(s);
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("nsglb_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(NSGLB_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config: minimal file parses with expected defaults") {
  const ExperimentConfig cfg = parse_config(minimal_config());
  CHECK(cfg.T == 10);
  CHECK(cfg.d == 2);
  CHECK(cfg.K == 5);
  CHECK(cfg.arm_mode == ArmMode::random_sphere);
  CHECK(cfg.policies.size() == 1);
  CHECK(cfg.policies[0].label == "bvd_glm_ucb");
  CHECK_FALSE(cfg.hash.empty());
}

TEST_CASE("config: unknown keys are rejected at every level") {
  json j = minimal_config();
  j["surprise"] = 1;
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
  j = minimal_config();
  j["env"]["extra"] = true;
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
  j = minimal_config();
  j["policies"][0]["whatever"] = 2;
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
}

TEST_CASE("config: scalar constraints are enforced") {
  json j = minimal_config();
  j["problem"]["lambda"] = 0.0;
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
  j = minimal_config();
  j["problem"]["delta"] = 1.5;
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
  j = minimal_config();
  j["policies"][0]["gamma"] = 1.0;  // explicit gamma must be strictly inside (0,1)
  const ExperimentConfig bad_gamma = parse_config(j);
  CHECK_THROWS_AS(bad_gamma.resolve_gamma(bad_gamma.policies[0]), std::invalid_argument);
  j = minimal_config();
  j["seeds"] = json::array();
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
  j = minimal_config();
  j["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
}

TEST_CASE("config: gamma auto resolves through the variation budget") {
  const ExperimentConfig cfg = parse_config(minimal_config(3000));
  const double g = cfg.resolve_gamma(cfg.policies[0]);
  CHECK(g == doctest::Approx(tune_gamma(variation_budget(cfg.schedule()), 2, 3000,
                                        TuneMode::orthogonal))
                 .epsilon(1e-15));
  // stationary environments fall back to the clamp ceiling
  json j = minimal_config();
  j["env"] = {{"kind", "stationary"}, {"T", 100}, {"theta", {0.1, 0.2}}};
  const ExperimentConfig st = parse_config(j);
  CHECK(st.resolve_gamma(st.policies[0]) == 1.0 - 1e-6);
}

TEST_CASE("config: piecewise environment and identity link parse and run") {
  json j = {
      {"schema_version", 1},
      {"env",
       {{"kind", "piecewise_constant"},
        {"T", 30},
        {"K", 4},
        {"link", "identity"},
        {"segments",
         json::array({{{"start", 1}, {"theta", {0.0, 0.6}}},
                      {{"start", 16}, {"theta", {0.6, 0.0}}}})}}},
      {"policies", json::array({{{"kind", "oful"}}, {{"kind", "d_linucb"}}})},
      {"seeds", {3}},
      {"out_dir", ""},
  };
  const ExperimentConfig cfg = parse_config(j);
  CHECK(cfg.d == 2);
  CHECK(cfg.link == LinkKind::identity);
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.rows.size() == 60);
  for (const RoundRecord& r : res.rows) {
    CHECK(r.reward >= 0.0);
    CHECK(r.reward <= 1.0);  // identity rewards bounded by 2*sigma
  }
}

TEST_CASE("config_hash: content-sensitive, key-order stable") {
  json a = {{"b", 2}, {"a", 1}};
  json b = {{"a", 1}, {"b", 2}};
  CHECK(config_hash(a) == config_hash(b));
  b["a"] = 3;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("load_config: missing file is a runtime error") {
  CHECK_THROWS_AS(load_config("/nonexistent/missing.json"), std::runtime_error);
}

TEST_CASE("run_experiment: row counts, prefix sums, monotone rounds") {
  ExperimentConfig cfg = parse_config(minimal_config(10, 2));
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.rows.size() == 20);  // 2 seeds x 1 policy x T=10
  std::map<std::string, double> cum;
  std::map<std::string, long> last_t;
  for (const RoundRecord& r : res.rows) {
    const std::string key = std::to_string(r.seed) + "/" + r.algo;
    cum[key] += r.regret;
    CHECK(r.cum_regret == doctest::Approx(cum[key]).epsilon(0).scale(1).epsilon(1e-9));
    if (last_t.count(key)) CHECK(r.t == last_t[key] + 1);
    last_t[key] = r.t;
    CHECK(r.regret >= 0.0);
  }
}

TEST_CASE("run_experiment: identical configs give byte-identical CSVs") {
  const fs::path dir1 = fresh_dir("csv_a");
  const fs::path dir2 = fresh_dir("csv_b");
  json j = minimal_config(25, 2);
  j["policies"].push_back({{"kind", "oful"}});
  j["out_dir"] = dir1.string();
  run_experiment(parse_config(j));
  j["out_dir"] = dir2.string();
  run_experiment(parse_config(j));
  const std::string csv1 = slurp(dir1 / "rounds.csv");
  const std::string csv2 = slurp(dir2 / "rounds.csv");
  CHECK(csv1 == csv2);
  CHECK(csv1.substr(0, csv1.find('\n')) ==
        "seed,t,algo,arm,reward,regret,cum_regret,theta_hat_norm,outside_theta");
  // exactly header + 2 seeds x 2 policies x 25 rounds
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 1 + 2 * 2 * 25);
}

TEST_CASE("run_experiment: adding a policy never changes another policy's rows") {
  json solo = minimal_config(40, 2);
  json both = minimal_config(40, 2);
  both["policies"].push_back({{"kind", "d_linucb"}});
  const ExperimentResult r1 = run_experiment(parse_config(solo));
  const ExperimentResult r2 = run_experiment(parse_config(both));
  std::vector<RoundRecord> bvd_rows;
  for (const RoundRecord& r : r2.rows)
    if (r.algo == "bvd_glm_ucb") bvd_rows.push_back(r);
  REQUIRE(bvd_rows.size() == r1.rows.size());
  for (std::size_t i = 0; i < bvd_rows.size(); ++i) {
    CHECK(bvd_rows[i].arm == r1.rows[i].arm);
    CHECK(bvd_rows[i].reward == r1.rows[i].reward);
    CHECK(bvd_rows[i].cum_regret == r1.rows[i].cum_regret);
  }
}

TEST_CASE("run_experiment: summary carries checkpoints and per-policy stats") {
  json j = minimal_config(100, 3);
  const ExperimentConfig cfg = parse_config(j);
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.checkpoints == std::vector<long>{25, 50, 75, 100});
  REQUIRE(res.summaries.size() == 1);
  CHECK(res.summaries[0].mean_cum_regret.size() == 4);
  // mean at T equals the average of the three final rows
  double total = 0.0;
  for (const RoundRecord& r : res.rows)
    if (r.t == 100) total += r.cum_regret;
  CHECK(res.summaries[0].mean_cum_regret.back() == doctest::Approx(total / 3.0).epsilon(1e-12));
  const json sj = summary_json(cfg, res);
  CHECK(sj.at("policies").contains("bvd_glm_ucb"));
  CHECK(sj.at("config_hash") == cfg.hash);
}

TEST_CASE("cli: budget subcommand prints the rotating numbers") {
  const fs::path out = fresh_dir("budget") / "budget.txt";
  const int rc = std::system(
      (std::string(NSGLB_CLI_PATH) + " budget --env rotating --T 3000 --d 2 > " + out.string())
          .c_str());
  CHECK(WEXITSTATUS(rc) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("B_T = 1.5708") != std::string::npos);
  CHECK(text.find("gamma_orthogonal = 0.995908") != std::string::npos);
  CHECK(text.find("gamma_general = 0.957597") != std::string::npos);
}

TEST_CASE("cli: exit codes for usage and missing-config errors") {
  CHECK(run_cli("definitely_not_a_subcommand") == 2);
  CHECK(run_cli("run --config /nonexistent/missing.json") == 2);
  CHECK(run_cli("run --config /nonexistent/missing.json --bogus-flag") == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("cli: run smoke test writes the CSV") {
  const fs::path dir = fresh_dir("cli_run");
  const fs::path cfg_path = dir / "cfg.json";
  json j = minimal_config(50, 1);
  j["out_dir"] = (dir / "out").string();
  std::ofstream(cfg_path) << j.dump();
  CHECK(run_cli("run --config " + cfg_path.string() + " --quiet") == 0);
  CHECK(fs::exists(dir / "out" / "rounds.csv"));
  CHECK(fs::exists(dir / "out" / "summary.json"));
  // --horizon override shrinks the file
  CHECK(run_cli("run --config " + cfg_path.string() + " --horizon 10 --quiet") == 0);
  const std::string csv = slurp(dir / "out" / "rounds.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("cli: bob smoke test writes its CSV and summary") {
  const fs::path dir = fresh_dir("cli_bob");
  const fs::path cfg_path = dir / "cfg.json";
  json j = minimal_config(120, 1);
  j["bob"] = {{"H", 40}};
  j["out_dir"] = (dir / "out").string();
  std::ofstream(cfg_path) << j.dump();
  CHECK(run_cli("bob --config " + cfg_path.string() + " --quiet") == 0);
  CHECK(fs::exists(dir / "out" / "bob_rounds.csv"));
  CHECK(fs::exists(dir / "out" / "bob_summary.json"));
  const json summary = json::parse(slurp(dir / "out" / "bob_summary.json"));
  CHECK(summary.at("runs").size() == 1);
  CHECK(summary.at("runs")[0].at("blocks").size() == 3);
}
