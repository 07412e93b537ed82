#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contract.hpp"
#include "learning.hpp"

namespace uavsim {

enum class Policy { predictive, closest, max_energy };

Policy policy_from_string(const std::string& s);
std::string to_string(Policy p);

struct BsSite {
  int id = 0;
  SpatialPoint position;
  Region service_area;
  double capacity_bps = 0.0;  // overload threshold on offered downlink load
};

struct RechargeStation {
  SpatialPoint position;
};

/// Offered traffic of one base station, absolute time, sorted by time.
struct RecordStream {
  int bs_id = 0;
  std::vector<TransmissionRecord> records;
};

struct SimParams {
  double overload_window_s = 60.0;   // sustained exceedance before detection
  double backoff_s = 60.0;           // re-broadcast wait after an empty round
  double round_hold_s = 1.0;         // broadcast-channel time per subarea round
  double recharge_s = 600.0;
  double full_energy_j = 90000.0;
  double relisten_power_floor_w = 1.0;
  int gmm_components = 3;
  int gmf_components = 3;
  bool stochastic_excess_loss = false;
  PlacementOptions placement;
  FitOptions fit;
};

struct Scenario {
  uint64_t seed = 0;
  std::vector<BsSite> bss;
  std::vector<UavProfile> fleet;
  std::vector<RechargeStation> stations;
  std::vector<RecordStream> streams;
  EconomicParams econ;
  ChannelParams channel;
  LearningConfig learning;
  SimParams sim;

  void validate() const;
  const RecordStream& stream_for(int bs_id) const;
};

/// Ideal FIFO-exclusive control channel: requests queue by
/// (request time, bs id); the holder keeps it through all its rounds.
class BroadcastChannel {
 public:
  void acquire(int bs_id, double time);
  /// Next grant once the channel is free at `now`; (bs, grant time).
  std::optional<std::pair<int, double>> try_grant(double now);
  void release(int bs_id, double time);
  std::optional<int> holder() const { return holder_; }
  bool has_pending() const { return !pending_.empty(); }
  double free_at() const { return free_at_; }

 private:
  struct Pending {
    double time;
    int bs_id;
    bool operator<(const Pending& o) const {
      return time != o.time ? time < o.time : bs_id < o.bs_id;
    }
  };
  std::vector<Pending> pending_;
  std::optional<int> holder_;
  double free_at_ = 0.0;
};

/// One structured simulation event (JSON-lines serializable).
struct LogEvent {
  double time_s = 0.0;
  std::string kind;
  int bs_id = -1;
  int uav_id = -1;
  int subarea = -1;
  int engagement = -1;
  std::map<std::string, double> payload;

  std::string to_json_line() const;
};

struct MetricsReport {
  std::string policy;
  double total_capacity_bps = 0.0;
  double avg_energy_per_uav_j = 0.0;
  double avg_service_delay_s = 0.0;
  double avg_bs_utility = 0.0;
  double total_uav_utility = 0.0;
  int detections = 0;
  int rounds_broadcast = 0;
  int engagements_served = 0;
  int rounds_unserved = 0;
  int recharges = 0;
  int fleet_size = 0;

  std::string to_json() const;
};

/// Detection times for one stream: the rolling mean of the offered load
/// over the last window exceeds the capacity, with an equal re-arm gap.
std::vector<double> detection_times(const RecordStream& stream, double capacity_bps,
                                    double window_s, double horizon_s);

/// Aggregates a complete event log into a report; a log holding an
/// engagement without its end marker is rejected.
MetricsReport collect_metrics(const std::vector<LogEvent>& log);

/// Runs the four-stage deployment process over the scenario's record
/// streams under one policy. Deterministic for a fixed scenario.
MetricsReport run_simulation(const Scenario& scenario, Policy policy,
                             double horizon_s,
                             std::vector<LogEvent>* log_out = nullptr);

}  // namespace uavsim
