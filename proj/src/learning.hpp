#pragma once

#include <cstdint>
#include <vector>

#include "channel.hpp"
#include "mixture.hpp"
#include "placement.hpp"

namespace uavsim {

/// One downlink transmission record collected during the learning stage.
struct TransmissionRecord {
  double rate_bps = 0.0;
  Vec2 location{0.0, 0.0};
  double time_s = 0.0;
};

struct LearningConfig {
  double slot_s = 1.0;              // delta t
  double learn_window_s = 120.0;    // tau
  double service_interval_s = 1080.0;  // T
  double efficiency = 0.9;          // eta
  double travel_fraction = 0.1;     // kappa
  double grid_cell_m = 10.0;

  void validate() const {
    if (!(slot_s > 0.0 && slot_s <= learn_window_s &&
          learn_window_s < service_interval_s))
      throw invalid("need 0 < slot <= learn window < service interval");
    if (!(efficiency > 0.0 && efficiency < 1.0))
      throw invalid("efficiency must be in (0,1)");
    if (!(travel_fraction > 0.0 && travel_fraction < 1.0))
      throw invalid("travel fraction must be in (0,1)");
    if (grid_cell_m <= 0.0) throw invalid("grid cell must be positive");
  }
};

/// Learning-stage output for one base station.
struct DemandEstimate {
  MixtureModel density_model;  // density-function kind
  Region hotspot;
  double demand_bits = 0.0;
  double avg_rate_per_hotspot_ue_bps = 0.0;
  int hotspot_ue_count = 0;
  std::vector<std::pair<Region, double>> subareas;
};

/// Time-averaged rate per grid-snapped location: weight = sum(s dt) / tau.
WeightedSamples build_density_samples(const std::vector<TransmissionRecord>& records,
                                      const LearningConfig& config);

/// Probabilistic UE-location model from the unweighted location multiset.
MixtureModel estimate_ue_distribution(const std::vector<TransmissionRecord>& records,
                                      int num_components, uint64_t seed,
                                      const FitOptions& opts = {});

/// Traffic-density surface from the weighted samples; integrates to the
/// total observed time-averaged rate.
MixtureModel estimate_traffic_density(const std::vector<TransmissionRecord>& records,
                                      int num_components,
                                      const LearningConfig& config,
                                      const FitOptions& opts = {});

/// Super-average-density connected cell set around the strongest mixture
/// peak. Throws "no hotspot" when nothing exceeds the area average.
Region detect_hotspot(const MixtureModel& density_model, const Region& service_area);

/// Total data demand of a hotspot over one service interval.
double predict_demand(const MixtureModel& density_model, const Region& hotspot,
                      double T_s);

/// Channel/placement context for sizing subarea splits.
struct SplitContext {
  ChannelParams channel;
  PlacementOptions placement;
  double p_max_w = 20.0;
};

/// Evenly divides the hotspot demand into the smallest number of contiguous
/// subareas each of which a single max-power UAV can serve.
std::vector<std::pair<Region, double>> split_hotspot(
    const MixtureModel& density_model, const Region& hotspot, double demand_bits,
    const LearningConfig& config, const SplitContext& ctx);

/// Region integral of the surface divided by the UE count.
double avg_rate_per_ue(const MixtureModel& density_model, const Region& region,
                       int ue_count);

struct MreResult {
  double mre = 0.0;
  int used = 0;
  int skipped = 0;  // entries with zero actual
};

/// Mean relative error of predicted vs actual demand entries.
MreResult mre(const std::vector<double>& predicted, const std::vector<double>& actual);

/// EM-baseline demand: T x total time-averaged rate x UE mass in the hotspot.
double em_demand_baseline(const MixtureModel& ue_model,
                          const std::vector<TransmissionRecord>& records,
                          const Region& hotspot, double T_s,
                          const LearningConfig& config);

/// k-nearest-sample density baseline evaluated on the query grid.
double kmean_demand_baseline(const WeightedSamples& samples, int k,
                             const Region& hotspot, double T_s,
                             const LearningConfig& config);

}  // namespace uavsim
