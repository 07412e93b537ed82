#include "runner.hpp"

#include "wavelet.hpp"

#include <atomic>
#include <random>
#include <set>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace uavsim {

using nlohmann::json;
namespace fs = std::filesystem;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("UAVSIM_LOG");
    if (!env) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

namespace {
std::mutex log_mutex;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "[uavsim] " << msg << "\n";
  }
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "[uavsim:debug] " << msg << "\n";
  }
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw Error(Error::Kind::io, "cannot create directory " + path);
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Error::Kind::io, "cannot write " + tmp);
    f << content;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Error::Kind::io, "cannot move " + tmp + " into place");
}

uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t x = base ^ (a * 0x9e3779b97f4a7c15ull) ^ (b * 0xc2b2ae3d27d4eb4full) ^
               (c * 0x165667b19e3779f9ull);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}


namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_effective_config(const RunConfig& cfg, const std::string& out_dir) {
  atomic_write(out_dir + "/effective_config.json", config_to_json(cfg).dump(2) + "\n");
}

json region_json(const Region& r) {
  json cells = json::array();
  r.for_each_cell([&](int ix, int iy, Vec2) { cells.push_back({ix, iy}); });
  return json{{"origin", {r.origin().x, r.origin().y}},
              {"cell_m", r.cell_size()},
              {"nx", r.nx()},
              {"ny", r.ny()},
              {"cells", cells}};
}

}  // namespace

json cmd_ingest(const RunConfig& cfg, const std::string& bs_csv,
                const std::string& traffic_csv, const std::string& out_dir,
                uint64_t seed) {
  ensure_dir(out_dir);
  const ParsedDataset data = parse_dataset(bs_csv, traffic_csv, cfg.ingest.byte_scale);
  const Partition part = project_and_partition(data.bss, cfg.ingest.cell_m,
                                               cfg.ingest.pad_m);
  const LabelSynthesis labels = synthesize_labels(data, part, cfg.learning, seed);

  std::string bs_table = "bs_id,x_m,y_m\n";
  for (size_t i = 0; i < data.bss.size(); ++i) {
    bs_table += std::to_string(data.bss[i].bs_id) + "," +
                format_double(part.positions[i].x) + "," +
                format_double(part.positions[i].y) + "\n";
  }
  atomic_write(out_dir + "/bs_local.csv", bs_table);

  std::string records = "bs_id,time_s,x_m,y_m,rate_bps\n";
  long total_records = 0;
  for (const auto& stream : labels.streams) {
    for (const auto& r : stream.records) {
      records += std::to_string(stream.bs_id) + "," + format_double(r.time_s) + "," +
                 format_double(r.location.x) + "," + format_double(r.location.y) +
                 "," + format_double(r.rate_bps) + "\n";
      ++total_records;
    }
  }
  atomic_write(out_dir + "/records.csv", records);
  write_effective_config(cfg, out_dir);

  json summary{{"bs_count", data.bss.size()},
               {"traffic_rows", data.traffic.size()},
               {"dropped_rows", data.dropped_rows},
               {"merged_rows", data.merged_rows},
               {"skipped_hours", labels.skipped_hours},
               {"perturbed_duplicates", part.perturbed_duplicates},
               {"records", total_records},
               {"records_csv", out_dir + "/records.csv"},
               {"bs_csv", out_dir + "/bs_local.csv"}};
  atomic_write(out_dir + "/ingest_summary.json", summary.dump(2) + "\n");
  return summary;
}

json cmd_detect(const RunConfig& cfg, const std::string& traffic_csv) {
  // The city-level series needs the traffic table only; a BS table is not
  // required for detection.
  std::ifstream f(traffic_csv);
  if (!f) throw Error(Error::Kind::io, "cannot open traffic table: " + traffic_csv);
  ParsedDataset data;
  data.bss.push_back({0, 0.0, 0.0});
  std::string line;
  bool header = true;
  std::map<int, double> hours;
  int dropped = 0;
  while (std::getline(f, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    try {
      if (fields.size() < 5) throw std::runtime_error("short row");
      const int hour = std::stoi(fields[1]);
      const double bytes = std::stod(fields[4]);
      if (hour < 0 || bytes < 0) throw std::runtime_error("bad row");
      hours[hour] += bytes * cfg.ingest.byte_scale;
    } catch (...) {
      ++dropped;
    }
  }
  if (hours.empty()) throw Error(Error::Kind::parse, "no valid traffic rows");
  const int max_hour = hours.rbegin()->first;
  std::vector<double> series(max_hour + 1, 0.0);
  for (const auto& [h, v] : hours) series[h] = v;
  const auto flags = dwt_congestion_detect(series, cfg.detect.levels,
                                           cfg.detect.threshold_sigmas);
  json out{{"hours", series.size()},
           {"dropped_rows", dropped},
           {"levels", cfg.detect.levels},
           {"threshold_sigmas", cfg.detect.threshold_sigmas},
           {"flagged_hours", json::array()}};
  for (size_t t : flags) out["flagged_hours"].push_back(t);
  return out;
}

json make_scenario_json(const RunConfig& cfg, uint64_t seed, int fleet_size,
                        double rho_ratio) {
  SynthSpec spec = cfg.synth;
  if (fleet_size > 0) spec.fleet_size = fleet_size;
  if (rho_ratio > 0) spec.rho_ratio = rho_ratio;
  RunConfig used = cfg;
  used.synth = spec;
  json j;
  j["kind"] = "synthetic";
  j["seed"] = seed;
  j["config"] = config_to_json(used);
  return j;
}

namespace {

Scenario scenario_from_records(const json& sj, const RunConfig& cfg) {
  const std::string bs_csv = sj.at("bs_csv").get<std::string>();
  const std::string records_csv = sj.at("records_csv").get<std::string>();
  std::ifstream bsf(bs_csv);
  if (!bsf) throw Error(Error::Kind::io, "cannot open " + bs_csv);
  Scenario sc;
  sc.seed = sj.value("seed", 0ull);
  sc.econ = cfg.econ;
  sc.channel = cfg.channel;
  sc.learning = cfg.learning;
  sc.sim = cfg.sim;

  std::vector<Vec2> sites;
  std::vector<int> ids;
  std::string line;
  bool header = true;
  while (std::getline(bsf, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f1, f2, f3;
    std::getline(ss, f1, ',');
    std::getline(ss, f2, ',');
    std::getline(ss, f3, ',');
    ids.push_back(std::stoi(f1));
    sites.push_back({std::stod(f2), std::stod(f3)});
  }
  if (sites.empty()) throw Error(Error::Kind::parse, "empty BS table");

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& p : sites) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  const double pad = cfg.ingest.pad_m;
  const double cell = cfg.ingest.cell_m;
  const int nx = std::max(1, static_cast<int>(std::ceil((x_hi - x_lo + 2 * pad) / cell)));
  const int ny = std::max(1, static_cast<int>(std::ceil((y_hi - y_lo + 2 * pad) / cell)));
  auto regions = voronoi_regions(sites, {x_lo - pad, y_lo - pad}, cell, nx, ny);

  const double capacity = sj.value("capacity_bps", 0.0);
  std::map<int, std::vector<TransmissionRecord>> per_bs;
  {
    std::ifstream rf(records_csv);
    if (!rf) throw Error(Error::Kind::io, "cannot open " + records_csv);
    bool rheader = true;
    while (std::getline(rf, line)) {
      if (rheader) {
        rheader = false;
        continue;
      }
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string f[5];
      for (auto& s : f) std::getline(ss, s, ',');
      per_bs[std::stoi(f[0])].push_back(
          {std::stod(f[4]), {std::stod(f[2]), std::stod(f[3])}, std::stod(f[1])});
    }
  }
  double max_offered = 0.0;
  for (size_t i = 0; i < sites.size(); ++i) {
    double cap = capacity;
    if (cap <= 0.0) {
      // Default threshold: 60 percent of the stream's per-second peak.
      std::map<long, double> offered;
      for (const auto& r : per_bs[ids[i]])
        offered[static_cast<long>(r.time_s)] += r.rate_bps;
      double peak = 0.0;
      for (const auto& [t, v] : offered) peak = std::max(peak, v);
      cap = std::max(1.0, 0.6 * peak);
      max_offered = std::max(max_offered, peak);
    }
    sc.bss.push_back({ids[i], {sites[i].x, sites[i].y, 0.0}, regions[i], cap});
    sc.stations.push_back({{sites[i].x, sites[i].y, 0.0}});
    sc.streams.push_back({ids[i], std::move(per_bs[ids[i]])});
  }
  const int fleet = sj.value("fleet_size", cfg.synth.fleet_size);
  std::mt19937_64 rng(sc.seed);
  for (int j2 = 0; j2 < fleet; ++j2) {
    UavProfile u;
    u.id = j2;
    u.position = {std::uniform_real_distribution<double>(x_lo, x_hi)(rng),
                  std::uniform_real_distribution<double>(y_lo, y_hi)(rng),
                  cfg.synth.uav_altitude_m};
    u.speed_m_s = cfg.synth.uav_speed_m_s;
    u.energy_j = cfg.synth.full_energy_j;
    sc.fleet.push_back(u);
  }
  sc.sim.full_energy_j = cfg.synth.full_energy_j;
  return sc;
}

}  // namespace

Scenario load_scenario(const json& sj, const RunConfig& cfg) {
  const std::string kind = sj.value("kind", "synthetic");
  if (kind == "synthetic") {
    RunConfig used = cfg;
    if (sj.contains("config")) used = config_from_json(sj.at("config"));
    const uint64_t seed = sj.value("seed", 0ull);
    return synthetic_scenario(used.synth, used.econ, used.channel, used.learning,
                              used.sim, seed)
        .scenario;
  }
  if (kind == "records") return scenario_from_records(sj, cfg);
  throw Error(Error::Kind::parse, "unknown scenario kind: " + kind);
}

json cmd_learn(const RunConfig& cfg, const std::string& scenario_path,
               const std::string& out_dir) {
  std::ifstream f(scenario_path);
  if (!f) throw Error(Error::Kind::io, "cannot open scenario: " + scenario_path);
  json sj;
  try {
    sj = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(Error::Kind::parse, std::string("bad scenario JSON: ") + e.what());
  }
  RunConfig used = cfg;
  if (sj.contains("config")) used = config_from_json(sj.at("config"));
  Scenario sc = load_scenario(sj, cfg);
  sc.validate();
  ensure_dir(out_dir);
  write_effective_config(used, out_dir);

  const double tau = used.learning.learn_window_s;
  const double T = used.learning.service_interval_s;
  const double horizon = used.synth.horizon_s;

  struct MethodAcc {
    std::vector<double> predicted, actual;
  };
  std::map<std::string, MethodAcc> acc;
  json bs_reports = json::array();
  int events_total = 0, no_hotspot = 0;

  for (const auto& b : sc.bss) {
    const auto& stream = sc.stream_for(b.id);
    const auto detections =
        detection_times(stream, b.capacity_bps, sc.sim.overload_window_s, horizon);
    json bs_events = json::array();
    for (double td : detections) {
      std::vector<TransmissionRecord> window;
      for (const auto& r : stream.records)
        if (r.time_s > td && r.time_s <= td + tau)
          window.push_back({r.rate_bps, r.location, r.time_s - td});
      if (window.empty()) continue;
      json ev{{"detect_time_s", td}};
      ++events_total;
      try {
        MixtureModel density = estimate_traffic_density(window, sc.sim.gmf_components,
                                                        used.learning, sc.sim.fit);
        Region hotspot = detect_hotspot(density, b.service_area);
        const double predicted = predict_demand(density, hotspot, T);

        // Actual transmitted volume inside the hotspot over the service window.
        double actual = 0.0;
        for (const auto& r : stream.records)
          if (r.time_s > td + tau && r.time_s <= td + tau + T &&
              hotspot.contains(r.location))
            actual += r.rate_bps * used.learning.slot_s;

        MixtureModel ue_model = estimate_ue_distribution(
            window, sc.sim.gmm_components, mix_seed(sc.seed, b.id, 1), sc.sim.fit);
        const double em_pred =
            em_demand_baseline(ue_model, window, hotspot, T, used.learning);
        const WeightedSamples samples = build_density_samples(window, used.learning);
        json kmeans;
        for (int k : used.learn.kmean_ks) {
          if (k > static_cast<int>(samples.points.size())) continue;
          const double kp = kmean_demand_baseline(samples, k, hotspot, T, used.learning);
          kmeans[std::to_string(k)] = kp;
          acc["kmean_" + std::to_string(k)].predicted.push_back(kp);
          acc["kmean_" + std::to_string(k)].actual.push_back(actual);
        }
        acc["wem"].predicted.push_back(predicted);
        acc["wem"].actual.push_back(actual);
        acc["em"].predicted.push_back(em_pred);
        acc["em"].actual.push_back(actual);

        SplitContext ctx{sc.channel, sc.sim.placement, sc.econ.p_max_w};
        json subareas = json::array();
        try {
          for (const auto& [sub, d] : split_hotspot(density, hotspot, predicted,
                                                    used.learning, ctx))
            subareas.push_back({{"demand_bits", d}, {"cells", sub.count()}});
        } catch (const Error&) {
          subareas = json::array();
        }

        int hotspot_ues = 0;
        {
          std::set<std::pair<long, long>> locs;
          const double h = used.learning.grid_cell_m;
          for (const auto& r : window)
            if (hotspot.contains(r.location))
              locs.insert({static_cast<long>(std::floor(r.location.x / h)),
                           static_cast<long>(std::floor(r.location.y / h))});
          hotspot_ues = static_cast<int>(locs.size());
        }
        ev["status"] = "ok";
        ev["demand_bits"] = predicted;
        ev["actual_bits"] = actual;
        ev["em_bits"] = em_pred;
        ev["kmean_bits"] = kmeans;
        ev["hotspot"] = region_json(hotspot);
        ev["hotspot_ue_count"] = hotspot_ues;
        ev["avg_rate_per_hotspot_ue_bps"] =
            hotspot_ues > 0 ? avg_rate_per_ue(density, hotspot, hotspot_ues) : 0.0;
        ev["subareas"] = subareas;
      } catch (const Error&) {
        ev["status"] = "no hotspot";
        ++no_hotspot;
      }
      bs_events.push_back(ev);
    }
    json bs_report{{"bs", b.id}, {"events", bs_events}};
    atomic_write(out_dir + "/bs_" + std::to_string(b.id) + ".json",
                 bs_report.dump(2) + "\n");
    bs_reports.push_back(bs_report);
  }

  json mre_table = json::object();
  std::string csv = "method,mre,events\n";
  for (const auto& [method, a] : acc) {
    if (a.predicted.empty()) continue;
    const MreResult r = mre(a.predicted, a.actual);
    mre_table[method] = {{"mre", r.mre}, {"events", r.used}, {"skipped", r.skipped}};
    csv += method + "," + format_double(r.mre) + "," + std::to_string(r.used) + "\n";
  }
  atomic_write(out_dir + "/mre_table.csv", csv);

  json out{{"events", events_total},
           {"no_hotspot_events", no_hotspot},
           {"mre", mre_table},
           {"bs_count", sc.bss.size()}};
  atomic_write(out_dir + "/learn_report.json", out.dump(2) + "\n");
  return out;
}

json cmd_contract_check(const RunConfig& cfg, double demand_bits, int grid_size) {
  const double T = cfg.learning.service_interval_s;
  const double kappa = cfg.learning.travel_fraction;
  const ContractMenu menu = build_menu(demand_bits, T, cfg.econ, kappa);
  const IcReport ic = verify_ic(menu, grid_size);
  const IrReport ir_physical = verify_ir(menu, cfg.econ, grid_size);
  const IrReport ir_fixed =
      verify_ir(menu, cfg.econ, grid_size, cfg.econ.hover_power_w);

  // Closed-form residuals of the menu across the admissible interval.
  double worst_power = 0.0, worst_payment = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    const double t = kappa * T * i / std::max(1, grid_size - 1);
    const double theta = demand_bits / (cfg.econ.energy_cost_per_j * (T - t));
    const double x = T / (T - t);
    const double p_closed = cfg.econ.hover_power_w * x * x;
    const double u_closed =
        2.0 * cfg.econ.energy_cost_per_j * cfg.econ.hover_power_w * T * x;
    worst_power = std::max(worst_power,
                           std::abs(menu.power(theta) - p_closed) / p_closed);
    worst_payment = std::max(
        worst_payment,
        std::abs(menu.unit_payment(theta) * demand_bits - u_closed) / u_closed);
  }

  // A constant-slope menu tied to the mobility power instead of hover
  // power misses the boundary participation condition at theta_min.
  const double alt_gamma = cfg.econ.energy_cost_per_j * cfg.econ.move_power_w * T *
                           T / (2.0 * demand_bits * demand_bits);
  const double alt_margin =
      0.5 * alt_gamma * menu.theta_min * menu.theta_min - cfg.econ.hover_power_w;

  json out;
  out["menu"] = {{"gamma", menu.gamma},
                 {"theta_min", menu.theta_min},
                 {"theta_max", menu.theta_max},
                 {"demand_bits", demand_bits},
                 {"T_s", T},
                 {"kappa", kappa}};
  out["ic"] = {{"pass", ic.pass},
               {"argmax_truthful", ic.argmax_truthful},
               {"monotone", ic.monotone},
               {"marginal_identity", ic.marginal_identity},
               {"worst_identity_error", ic.worst_identity_error}};
  out["ir_physical"] = {{"pass", ir_physical.pass},
                        {"min_margin", ir_physical.min_margin},
                        {"worst_theta", ir_physical.worst_theta}};
  out["ir_fixed_offset"] = {{"pass", ir_fixed.pass},
                            {"min_margin", ir_fixed.min_margin},
                            {"worst_theta", ir_fixed.worst_theta}};
  out["closed_form"] = {{"max_power_residual", worst_power},
                        {"max_payment_residual", worst_payment}};
  out["mobility_slope_menu"] = {{"gamma", alt_gamma},
                                {"boundary_margin_w", alt_margin},
                                {"feasible", alt_margin >= 0.0}};
  return out;
}

json cmd_simulate(const RunConfig& cfg, const std::string& scenario_path,
                  const std::string& policy, double horizon_s,
                  const std::string& out_dir) {
  std::ifstream f(scenario_path);
  if (!f) throw Error(Error::Kind::io, "cannot open scenario: " + scenario_path);
  json sj;
  try {
    sj = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(Error::Kind::parse, std::string("bad scenario JSON: ") + e.what());
  }
  RunConfig used = cfg;
  if (sj.contains("config")) used = config_from_json(sj.at("config"));
  Scenario sc = load_scenario(sj, cfg);
  const double horizon = horizon_s > 0 ? horizon_s : used.synth.horizon_s;

  std::vector<LogEvent> log;
  const MetricsReport rep = run_simulation(sc, policy_from_string(policy), horizon, &log);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_effective_config(used, out_dir);
    std::string lines;
    for (const auto& e : log) lines += e.to_json_line() + "\n";
    atomic_write(out_dir + "/events.jsonl", lines);
    atomic_write(out_dir + "/metrics.json", rep.to_json() + "\n");
  }
  return json::parse(rep.to_json());
}

json cmd_compare(const RunConfig& cfg, const std::string& out_dir, int jobs) {
  ensure_dir(out_dir);
  write_effective_config(cfg, out_dir);
  const SweepSpec& sweep = cfg.sweep;

  struct Task {
    std::string policy;
    int fleet;
    double ratio;
    int rep;
    uint64_t seed;
    std::string dir;
    json metrics;
    bool failed = false;
    std::string error;
  };
  std::vector<Task> tasks;
  for (const auto& policy : sweep.policies)
    for (int fleet : sweep.fleet_sizes)
      for (size_t ri = 0; ri < sweep.ratios.size(); ++ri)
        for (int rep = 0; rep < sweep.seed_count; ++rep) {
          Task t;
          t.policy = policy;
          t.fleet = fleet;
          t.ratio = sweep.ratios[ri];
          t.rep = rep;
          t.seed = mix_seed(sweep.base_seed, fleet, ri, rep);
          t.dir = out_dir + "/runs/" + policy + "_f" + std::to_string(fleet) + "_r" +
                  std::to_string(ri) + "_s" + std::to_string(rep);
          tasks.push_back(t);
        }

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      Task& t = tasks[i];
      try {
        ensure_dir(t.dir);
        const json sj = make_scenario_json(cfg, t.seed, t.fleet, t.ratio);
        atomic_write(t.dir + "/scenario.json", sj.dump(2) + "\n");
        Scenario sc = load_scenario(sj, cfg);
        std::vector<LogEvent> log;
        const MetricsReport rep =
            run_simulation(sc, policy_from_string(t.policy), sweep.horizon_s, &log);
        std::string lines;
        for (const auto& e : log) lines += e.to_json_line() + "\n";
        atomic_write(t.dir + "/events.jsonl", lines);
        atomic_write(t.dir + "/metrics.json", rep.to_json() + "\n");
        t.metrics = json::parse(rep.to_json());
        log_info("run done: " + t.dir);
      } catch (const std::exception& e) {
        t.failed = true;
        t.error = e.what();
      }
    }
  };
  const int n_workers = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::vector<std::string> failures;
  for (const auto& t : tasks)
    if (t.failed) failures.push_back(t.dir + ": " + t.error);
  if (!failures.empty()) {
    json marker{{"status", "partial"}, {"failures", failures}};
    atomic_write(out_dir + "/partial_results.json", marker.dump(2) + "\n");
    throw Error(Error::Kind::runtime,
                "sweep aborted, partial results marked: " + failures.front());
  }

  const std::vector<std::string> metric_names{
      "total_capacity_bps", "avg_energy_per_uav_j", "avg_service_delay_s",
      "avg_bs_utility",     "total_uav_utility",    "engagements_served"};

  const bool single_ratio = sweep.ratios.size() == 1;
  std::map<size_t, std::string> csv_per_ratio;
  for (size_t ri = 0; ri < sweep.ratios.size(); ++ri)
    csv_per_ratio[ri] = "policy,fleet_size,seed,metric,value\n";
  json summary = json::object();
  for (const auto& t : tasks) {
    const size_t ri = std::find(sweep.ratios.begin(), sweep.ratios.end(), t.ratio) -
                      sweep.ratios.begin();
    for (const auto& m : metric_names) {
      csv_per_ratio[ri] += t.policy + "," + std::to_string(t.fleet) + "," +
                           std::to_string(t.rep) + "," + m + "," +
                           format_double(t.metrics.at(m).get<double>()) + "\n";
    }
  }
  for (size_t ri = 0; ri < sweep.ratios.size(); ++ri) {
    const std::string name =
        single_ratio ? "sweep.csv" : "sweep_ratio" + std::to_string(ri) + ".csv";
    atomic_write(out_dir + "/" + name, csv_per_ratio[ri]);
  }

  // Means per (policy, fleet, metric).
  for (const auto& policy : sweep.policies) {
    for (int fleet : sweep.fleet_sizes) {
      json cell = json::object();
      for (const auto& m : metric_names) {
        double sum = 0.0;
        int n = 0;
        for (const auto& t : tasks)
          if (t.policy == policy && t.fleet == fleet) {
            sum += t.metrics.at(m).get<double>();
            ++n;
          }
        cell[m] = n > 0 ? sum / n : 0.0;
      }
      summary[policy][std::to_string(fleet)] = cell;
    }
  }
  json out{{"runs", tasks.size()}, {"means", summary}};
  atomic_write(out_dir + "/summary.json", out.dump(2) + "\n");
  return out;
}

json cmd_report(const RunConfig&, const std::string& sweep_csv) {
  std::ifstream f(sweep_csv);
  if (!f) throw Error(Error::Kind::io, "cannot open sweep table: " + sweep_csv);
  std::string line;
  bool header = true;
  struct Key {
    std::string policy;
    int fleet;
    std::string metric;
    bool operator<(const Key& o) const {
      return std::tie(policy, fleet, metric) < std::tie(o.policy, o.fleet, o.metric);
    }
  };
  std::map<Key, std::pair<double, int>> acc;
  while (std::getline(f, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string policy, fleet, seed, metric, value;
    std::getline(ss, policy, ',');
    std::getline(ss, fleet, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, value, ',');
    auto& slot = acc[{policy, std::stoi(fleet), metric}];
    slot.first += std::stod(value);
    slot.second += 1;
  }
  if (acc.empty()) throw Error(Error::Kind::parse, "empty sweep table");
  json out = json::object();
  for (const auto& [key, sums] : acc)
    out[key.policy][std::to_string(key.fleet)][key.metric] = sums.first / sums.second;
  return json{{"means", out}};
}

}  // namespace uavsim
