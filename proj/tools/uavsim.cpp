// Command-line front end. All functionality is reached through the shared
// library's C interface; this file only parses arguments, merges flag
// overrides into the configuration document, and moves files around.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uavsim.h"

namespace {

using nlohmann::json;

struct CliState {
  std::string config_path;
  uint64_t seed = 1;
  bool seed_given = false;
  std::string out_dir;
  std::vector<std::string> policies;
  std::vector<int> fleets;
  std::vector<double> ratios;
  int jobs = 1;
};

int exit_code_for(uavsim_status st) {
  switch (st) {
    case UAVSIM_OK: return 0;
    case UAVSIM_ERR_INVALID_ARGUMENT:
    case UAVSIM_ERR_IO:
    case UAVSIM_ERR_PARSE: return 2;
    default: return 3;
  }
}

// Configuration document: file contents (if any) plus flag overrides.
std::string compose_config(const CliState& s) {
  json j = json::object();
  if (!s.config_path.empty()) {
    std::ifstream f(s.config_path);
    if (!f) {
      std::cerr << "error: cannot open config file: " << s.config_path << "\n";
      std::exit(2);
    }
    try {
      f >> j;
    } catch (const std::exception& e) {
      std::cerr << "error: config file " << s.config_path
                << " is not valid JSON: " << e.what() << "\n";
      std::exit(2);
    }
  }
  if (!s.policies.empty()) j["sweep"]["policies"] = s.policies;
  if (!s.fleets.empty()) j["sweep"]["fleet_sizes"] = s.fleets;
  if (!s.ratios.empty()) j["sweep"]["ratios"] = s.ratios;
  if (s.seed_given) j["sweep"]["base_seed"] = s.seed;
  return j.dump();
}

struct Ctx {
  uavsim_ctx* handle = nullptr;
  ~Ctx() { uavsim_ctx_free(handle); }
};

int make_ctx(const CliState& s, Ctx& ctx) {
  const std::string cfg = compose_config(s);
  const uavsim_status st = uavsim_ctx_new(cfg.c_str(), &ctx.handle);
  if (st != UAVSIM_OK) {
    std::cerr << "error: invalid configuration";
    if (!s.config_path.empty()) std::cerr << " (" << s.config_path << ")";
    std::cerr << "\n";
    return exit_code_for(st);
  }
  return 0;
}

int finish(uavsim_ctx* ctx, uavsim_status st, char* result,
           const std::string& save_path = "") {
  if (st != UAVSIM_OK) {
    std::cerr << "error: " << uavsim_last_error(ctx) << "\n";
    uavsim_string_free(result);
    return exit_code_for(st);
  }
  if (result) {
    if (!save_path.empty()) {
      std::ofstream f(save_path, std::ios::trunc);
      if (!f) {
        std::cerr << "error: cannot write " << save_path << "\n";
        uavsim_string_free(result);
        return 2;
      }
      f << result << "\n";
    }
    std::cout << result << "\n";
    uavsim_string_free(result);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uavsim: predictive UAV base-station deployment simulator"};
  app.require_subcommand(1);
  CliState s;
  app.add_option("--config", s.config_path, "JSON configuration file")
      ->configurable(false);
  app.add_option("--seed", s.seed, "base random seed")
      ->each([&](const std::string&) { s.seed_given = true; });
  app.add_option("--out", s.out_dir, "output directory or file");
  app.add_option("--policy", s.policies, "policy list")->delimiter(',');
  app.add_option("--fleet", s.fleets, "fleet-size list")->delimiter(',');
  app.add_option("--ratio", s.ratios, "hotspot-to-average rate ratio list")
      ->delimiter(',');
  app.add_option("--jobs", s.jobs, "parallel sweep workers");
  app.fallthrough();

  std::string bs_csv, traffic_csv, scenario, policy = "predictive", sweep_csv;
  double demand = 1e10, horizon = -1.0;
  int grid = 200;

  auto* ingest = app.add_subcommand("ingest", "parse raw tables into located records");
  ingest->add_option("--bs", bs_csv, "BS table (id,longitude,latitude)")->required();
  ingest->add_option("--traffic", traffic_csv, "traffic table (id,hour,users,packets,bytes)")
      ->required();

  auto* detect = app.add_subcommand("detect", "flag congested hours in the city series");
  detect->add_option("--traffic", traffic_csv, "traffic table")->required();

  auto* mk = app.add_subcommand("make-scenario", "write a synthetic scenario file");
  int mk_fleet = 0;
  double mk_ratio = 0.0;
  mk->add_option("--fleet-size", mk_fleet, "override the configured fleet size");
  mk->add_option("--ratio-value", mk_ratio, "override the configured rate ratio");

  auto* learn = app.add_subcommand("learn", "demand learning over every congestion episode");
  learn->add_option("--scenario", scenario, "scenario file")->required();

  auto* check = app.add_subcommand("contract-check", "offload-contract feasibility report");
  check->add_option("--demand", demand, "hotspot demand in bits");
  check->add_option("--grid", grid, "type-grid resolution");

  auto* simulate = app.add_subcommand("simulate", "run one deployment simulation");
  simulate->add_option("--scenario", scenario, "scenario file")->required();
  simulate->add_option("--run-policy", policy, "predictive | closest | max_energy");
  simulate->add_option("--horizon", horizon, "simulation horizon in seconds");

  auto* compare = app.add_subcommand("compare", "policy x fleet x seed sweep");

  auto* report = app.add_subcommand("report", "aggregate a sweep table");
  report->add_option("--sweep", sweep_csv, "sweep.csv from a compare run")->required();

  CLI11_PARSE(app, argc, argv);

  Ctx ctx;
  if (int rc = make_ctx(s, ctx)) return rc;
  char* result = nullptr;

  if (ingest->parsed()) {
    if (s.out_dir.empty()) {
      std::cerr << "error: ingest needs --out DIR\n";
      return 2;
    }
    const uavsim_status st = uavsim_ingest(ctx.handle, bs_csv.c_str(),
                                           traffic_csv.c_str(), s.out_dir.c_str(),
                                           s.seed, &result);
    return finish(ctx.handle, st, result);
  }
  if (detect->parsed()) {
    const uavsim_status st = uavsim_detect(ctx.handle, traffic_csv.c_str(), &result);
    return finish(ctx.handle, st, result,
                  s.out_dir.empty() ? "" : s.out_dir + "/detect_flags.json");
  }
  if (mk->parsed()) {
    if (s.out_dir.empty()) {
      std::cerr << "error: make-scenario needs --out FILE\n";
      return 2;
    }
    const uavsim_status st =
        uavsim_make_scenario(ctx.handle, s.seed, mk_fleet, mk_ratio, &result);
    return finish(ctx.handle, st, result, s.out_dir);
  }
  if (learn->parsed()) {
    if (s.out_dir.empty()) {
      std::cerr << "error: learn needs --out DIR\n";
      return 2;
    }
    const uavsim_status st =
        uavsim_learn(ctx.handle, scenario.c_str(), s.out_dir.c_str(), &result);
    return finish(ctx.handle, st, result);
  }
  if (check->parsed()) {
    const uavsim_status st = uavsim_contract_check(ctx.handle, demand, grid, &result);
    return finish(ctx.handle, st, result,
                  s.out_dir.empty() ? "" : s.out_dir + "/contract_report.json");
  }
  if (simulate->parsed()) {
    const uavsim_status st = uavsim_simulate(
        ctx.handle, scenario.c_str(), policy.c_str(), horizon,
        s.out_dir.empty() ? nullptr : s.out_dir.c_str(), &result);
    return finish(ctx.handle, st, result);
  }
  if (compare->parsed()) {
    if (s.out_dir.empty()) {
      std::cerr << "error: compare needs --out DIR\n";
      return 2;
    }
    const uavsim_status st = uavsim_compare(ctx.handle, s.out_dir.c_str(), s.jobs, &result);
    return finish(ctx.handle, st, result);
  }
  if (report->parsed()) {
    const uavsim_status st = uavsim_report(ctx.handle, sweep_csv.c_str(), &result);
    return finish(ctx.handle, st, result);
  }
  return 2;
}
