#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "runner.hpp"

using namespace uavsim;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = "/tmp/uavsim_runner_" + name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config defaults round-trip and unknown keys are rejected") {
  RunConfig cfg;
  const json j = config_to_json(cfg);
  RunConfig back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());

  CHECK_THROWS_AS(config_from_string("{\"chanel\": {}}"), Error);
  CHECK_THROWS_AS(config_from_string("{\"channel\": {\"carrier\": 1}}"), Error);
  CHECK_THROWS_AS(config_from_string("{\"econ\": {\"p_max_w\": \"high\"}}"), Error);
  CHECK_THROWS_AS(config_from_string("not json"), Error);

  RunConfig tweaked =
      config_from_string("{\"learning\": {\"travel_fraction\": 0.2}}");
  CHECK(tweaked.learning.travel_fraction == 0.2);
  CHECK(tweaked.learning.slot_s == cfg.learning.slot_s);
}

TEST_CASE("config validation rejects inconsistent values") {
  CHECK_THROWS_AS(config_from_string("{\"learning\": {\"efficiency\": 1.5}}"), Error);
  CHECK_THROWS_AS(config_from_string("{\"sweep\": {\"policies\": [\"bogus\"]}}"),
                  Error);
  CHECK_THROWS_AS(config_from_string("{\"sweep\": {\"seed_count\": 0}}"), Error);
}

TEST_CASE("contract-check report content") {
  RunConfig cfg;
  const json rep = cmd_contract_check(cfg, 1e10, 200);
  CHECK(rep.at("ic").at("pass").get<bool>());
  CHECK(rep.at("ir_physical").at("pass").get<bool>());
  CHECK(rep.at("ir_fixed_offset").at("pass").get<bool>());
  CHECK(rep.at("closed_form").at("max_power_residual").get<double>() < 1e-12);
  CHECK(rep.at("closed_form").at("max_payment_residual").get<double>() < 1e-12);
  // The mobility-slope alternative misses the boundary condition.
  CHECK_FALSE(rep.at("mobility_slope_menu").at("feasible").get<bool>());
  CHECK(rep.at("mobility_slope_menu").at("boundary_margin_w").get<double>() <
        -1.0);
}

TEST_CASE("scenario json materializes deterministically") {
  RunConfig cfg;
  cfg.synth.bs_cols = 2;
  cfg.synth.bs_rows = 1;
  cfg.synth.events_per_bs = 1;
  cfg.synth.horizon_s = 4000.0;
  const json sj = make_scenario_json(cfg, 7, 3, 5.0);
  CHECK(sj.at("kind") == "synthetic");
  Scenario a = load_scenario(sj, cfg);
  Scenario b = load_scenario(sj, cfg);
  CHECK(a.fleet.size() == 3);
  REQUIRE(a.streams.size() == b.streams.size());
  CHECK(a.streams[0].records.size() == b.streams[0].records.size());
  CHECK_THROWS_AS(load_scenario(json{{"kind", "weird"}}, cfg), Error);
}

TEST_CASE("simulate command writes metrics and an event log") {
  RunConfig cfg;
  cfg.synth.bs_cols = 2;
  cfg.synth.bs_rows = 1;
  cfg.synth.events_per_bs = 1;
  cfg.synth.horizon_s = 4000.0;
  cfg.synth.fleet_size = 2;
  const std::string dir = fresh_dir("simulate");
  ensure_dir(dir);
  const json sj = make_scenario_json(cfg, 5, 0, 0.0);
  atomic_write(dir + "/scenario.json", sj.dump());

  const json m1 = cmd_simulate(cfg, dir + "/scenario.json", "predictive", -1.0,
                               dir + "/run1");
  const json m2 = cmd_simulate(cfg, dir + "/scenario.json", "predictive", -1.0,
                               dir + "/run2");
  CHECK(m1.dump() == m2.dump());
  CHECK(slurp(dir + "/run1/events.jsonl") == slurp(dir + "/run2/events.jsonl"));
  CHECK(slurp(dir + "/run1/metrics.json") == slurp(dir + "/run2/metrics.json"));
  CHECK(std::filesystem::exists(dir + "/run1/effective_config.json"));

  CHECK_THROWS_AS(cmd_simulate(cfg, dir + "/missing.json", "predictive", -1, ""),
                  Error);
  CHECK_THROWS_AS(
      cmd_simulate(cfg, dir + "/scenario.json", "bogus", -1, dir + "/run3"), Error);
}

TEST_CASE("compare emits a tidy sweep table and a means summary") {
  RunConfig cfg;
  cfg.synth.bs_cols = 2;
  cfg.synth.bs_rows = 1;
  cfg.synth.events_per_bs = 1;
  cfg.synth.horizon_s = 4000.0;
  cfg.sweep.policies = {"predictive", "closest"};
  cfg.sweep.fleet_sizes = {2, 3};
  cfg.sweep.seed_count = 2;
  cfg.sweep.horizon_s = 4000.0;
  const std::string dir = fresh_dir("compare");
  const json summary = cmd_compare(cfg, dir, 4);
  CHECK(summary.at("runs").get<int>() == 2 * 2 * 2);

  const std::string csv = slurp(dir + "/sweep.csv");
  CHECK(csv.rfind("policy,fleet_size,seed,metric,value\n", 0) == 0);
  // 8 runs x 6 metrics data rows.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 8 * 6);

  // Means equal hand-averaged per-run values.
  const json report = cmd_report(cfg, dir + "/sweep.csv");
  double sum = 0.0;
  int n = 0;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::stringstream ss(line);
    std::string policy, fleet, seed, metric, value;
    std::getline(ss, policy, ',');
    std::getline(ss, fleet, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, value, ',');
    if (policy == "predictive" && fleet == "2" && metric == "total_capacity_bps") {
      sum += std::stod(value);
      ++n;
    }
  }
  REQUIRE(n == 2);
  CHECK(report.at("means").at("predictive").at("2").at("total_capacity_bps")
            .get<double>() == doctest::Approx(sum / n).epsilon(1e-12));
  // The summary holds full doubles; the CSV carries 10 significant digits.
  CHECK(summary.at("means").at("predictive").at("2").at("total_capacity_bps")
            .get<double>() == doctest::Approx(sum / n).epsilon(1e-8));

  // Identical rerun produces byte-identical sweep output.
  const std::string dir2 = fresh_dir("compare2");
  cmd_compare(cfg, dir2, 2);
  CHECK(slurp(dir + "/sweep.csv") == slurp(dir2 + "/sweep.csv"));
  CHECK(slurp(dir + "/summary.json") == slurp(dir2 + "/summary.json"));
}

TEST_CASE("detect command flags an injected spike hour in a traffic table") {
  // 96 hourly rows with a daily pattern and one surge.
  std::string csv = "id,hour,users,packets,bytes\n";
  for (int h = 0; h < 96; ++h) {
    double bytes = 1000.0 + 200.0 * std::sin(2 * M_PI * h / 24.0);
    if (h == 41) bytes += 1500.0;
    csv += "7," + std::to_string(h) + ",10,5," + std::to_string(bytes) + "\n";
  }
  const std::string path = "/tmp/uavsim_runner_detect.csv";
  {
    std::ofstream f(path, std::ios::trunc);
    f << csv;
  }
  RunConfig cfg;
  const json flags = cmd_detect(cfg, path);
  REQUIRE(flags.at("flagged_hours").size() == 1);
  CHECK(flags.at("flagged_hours")[0].get<int>() == 41);
}

TEST_CASE("learn command reports per-BS estimates and an error table") {
  RunConfig cfg;
  cfg.synth.bs_cols = 2;
  cfg.synth.bs_rows = 1;
  cfg.synth.events_per_bs = 1;
  cfg.synth.horizon_s = 4000.0;
  cfg.synth.fleet_size = 0;
  const std::string dir = fresh_dir("learn");
  ensure_dir(dir);
  atomic_write(dir + "/scenario.json", make_scenario_json(cfg, 3, 0, 0.0).dump());
  const json rep = cmd_learn(cfg, dir + "/scenario.json", dir + "/learn");
  CHECK(rep.at("events").get<int>() >= 1);
  CHECK(rep.at("mre").contains("wem"));
  CHECK(rep.at("mre").contains("em"));
  CHECK(std::filesystem::exists(dir + "/learn/mre_table.csv"));
  CHECK(std::filesystem::exists(dir + "/learn/bs_0.json"));

  const json bs0 = json::parse(slurp(dir + "/learn/bs_0.json"));
  for (const auto& ev : bs0.at("events")) {
    if (ev.at("status") == "ok") {
      CHECK(ev.at("demand_bits").get<double>() > 0.0);
      CHECK(ev.at("hotspot").at("cells").size() > 0);
      CHECK(ev.contains("subareas"));
    }
  }
}
