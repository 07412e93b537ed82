#pragma once

#include <string>
#include <vector>

#include "ingest.hpp"
#include "json.hpp"

namespace uavsim {

struct SweepSpec {
  std::vector<std::string> policies = {"predictive", "closest", "max_energy"};
  std::vector<int> fleet_sizes = {2, 6, 10, 14};
  std::vector<double> ratios = {12.0};
  int seed_count = 10;
  uint64_t base_seed = 1;
  double horizon_s = 21600.0;
};

struct DetectSpec {
  int levels = 2;
  double threshold_sigmas = 3.0;
};

struct IngestSpec {
  double byte_scale = 1.0;
  double cell_m = 25.0;
  double pad_m = 500.0;
};

struct LearnSpec {
  std::vector<int> kmean_ks = {1, 3, 10};
};

/// Full run configuration; JSON round-trips exactly and unknown keys are
/// rejected at parse time.
struct RunConfig {
  ChannelParams channel;
  EconomicParams econ;
  LearningConfig learning;
  SimParams sim;  // carries placement + fit options
  SynthSpec synth;
  SweepSpec sweep;
  DetectSpec detect;
  IngestSpec ingest;
  LearnSpec learn;

  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig config_from_string(const std::string& text);
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace uavsim
