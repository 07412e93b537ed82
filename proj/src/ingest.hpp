#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sim.hpp"

namespace uavsim {

struct RawBsRecord {
  int bs_id = 0;
  double longitude_deg = 0.0;
  double latitude_deg = 0.0;
};

struct RawTrafficRow {
  int bs_id = 0;
  int hour = 0;
  long ue_count = 0;
  long packets = 0;
  double bytes = 0.0;
};

struct ParsedDataset {
  std::vector<RawBsRecord> bss;
  std::vector<RawTrafficRow> traffic;  // duplicates merged, sorted (bs, hour)
  int dropped_rows = 0;
  int merged_rows = 0;
};

/// Reads the two comma-separated tables (with headers); invalid rows are
/// dropped and counted, duplicate (bs, hour) rows summed.
ParsedDataset parse_dataset(const std::string& bs_file,
                            const std::string& traffic_file,
                            double byte_scale = 1.0);

/// Local-meter projection of BS coordinates about their centroid.
struct Projection {
  double lon0_deg = 0.0;
  double lat0_deg = 0.0;
  Vec2 to_local(double lon_deg, double lat_deg) const;
  void to_geo(const Vec2& p, double& lon_deg, double& lat_deg) const;
};

Projection make_projection(const std::vector<RawBsRecord>& bss);

/// Closest-BS assignment of the grid cells spanning all positions.
struct Partition {
  Projection projection;
  std::vector<SpatialPoint> positions;  // projected BS positions, z = 0
  std::vector<Region> regions;          // one per BS, shared grid
  int perturbed_duplicates = 0;
};

Partition project_and_partition(const std::vector<RawBsRecord>& bss,
                                double cell_m, double pad_m = 500.0);

/// Voronoi assignment over an explicit grid (also used by the synthetic
/// scenario builder).
std::vector<Region> voronoi_regions(const std::vector<Vec2>& sites, Vec2 origin,
                                    double cell_m, int nx, int ny);

/// Per-packet second-granularity records: uniform random second within the
/// hour, locations from a seeded per-BS mixture plus 3 m noise, rate
/// spreading the hour's bytes evenly over its packets.
struct LabelSynthesis {
  std::vector<RecordStream> streams;
  int skipped_hours = 0;  // packets == 0 but bytes > 0
};

LabelSynthesis synthesize_labels(const ParsedDataset& data, const Partition& part,
                                 const LearningConfig& learning, uint64_t seed);

/// City-level hourly totals (bytes) for congestion detection.
std::vector<double> city_hourly_series(const ParsedDataset& data);

/// Knobs for the fully synthetic scenario generator used by tests and the
/// policy sweeps.
struct SynthSpec {
  int bs_cols = 2;
  int bs_rows = 2;
  double bs_spacing_m = 800.0;
  double cell_m = 25.0;
  double bs_capacity_bps = 0.0;  // <= 0: derived from the background load

  int background_ue_per_bs = 600;
  double background_rate_per_ue_bps = 6.7e4;
  double background_interval_s = 60.0;

  int hotspot_ue_count = 40;
  double hotspot_sigma_m = 22.0;
  double hotspot_interval_s = 30.0;
  double rho_ratio = 12.0;  // hotspot per-UE rate over the all-UE average

  int events_per_bs = 3;
  double horizon_s = 21600.0;

  double hotspot_offset_fraction = 0.35;  // of the BS spacing

  int fleet_size = 6;
  double uav_speed_m_s = 5.0;
  double full_energy_j = 90000.0;
  double min_initial_energy_fraction = 0.4;
  double uav_altitude_m = 100.0;

  int num_clusters = 1;  // hotspot clusters per event
};

/// Ground truth retained for prediction scoring.
struct EventTruth {
  int bs_id = 0;
  double start_s = 0.0;
  Vec2 center{0, 0};
  double sigma_m = 0.0;
  double hotspot_rate_bps = 0.0;  // total offered rate of the hotspot UEs
  double measured_rho_ratio = 0.0;
};

struct SyntheticScenario {
  Scenario scenario;
  std::vector<EventTruth> truths;
};

SyntheticScenario synthetic_scenario(const SynthSpec& spec,
                                     const EconomicParams& econ,
                                     const ChannelParams& channel,
                                     const LearningConfig& learning,
                                     const SimParams& sim, uint64_t seed);

}  // namespace uavsim
