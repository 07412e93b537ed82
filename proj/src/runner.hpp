#pragma once

#include <string>

#include "config.hpp"

namespace uavsim {

/// Verbosity from UAVSIM_LOG (silent | info | debug); stderr sink.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

void ensure_dir(const std::string& path);
/// Write-then-rename so partial files never appear under the final name.
void atomic_write(const std::string& path, const std::string& content);

uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0);

// Command layer shared by the C API and the CLI. Every command writes its
// outputs under out_dir (when given) and returns a JSON summary.

nlohmann::json cmd_ingest(const RunConfig& cfg, const std::string& bs_csv,
                          const std::string& traffic_csv,
                          const std::string& out_dir, uint64_t seed);

nlohmann::json cmd_detect(const RunConfig& cfg, const std::string& traffic_csv);

/// Synthetic scenario file content; fleet_size/ratio <= 0 fall back to the
/// configured values.
nlohmann::json make_scenario_json(const RunConfig& cfg, uint64_t seed,
                                  int fleet_size, double rho_ratio);

/// Materializes a scenario file: synthetic specs are regenerated from their
/// embedded seed, record-table scenarios load the canonical CSV.
Scenario load_scenario(const nlohmann::json& sj, const RunConfig& cfg);

nlohmann::json cmd_learn(const RunConfig& cfg, const std::string& scenario_path,
                         const std::string& out_dir);

nlohmann::json cmd_contract_check(const RunConfig& cfg, double demand_bits,
                                  int grid_size);

nlohmann::json cmd_simulate(const RunConfig& cfg, const std::string& scenario_path,
                            const std::string& policy, double horizon_s,
                            const std::string& out_dir);

nlohmann::json cmd_compare(const RunConfig& cfg, const std::string& out_dir,
                           int jobs);

nlohmann::json cmd_report(const RunConfig& cfg, const std::string& sweep_csv);

}  // namespace uavsim
