#pragma once

#include <optional>

#include "channel.hpp"

namespace uavsim {

struct PlacementResult {
  SpatialPoint service_point;
  double min_power_w = 0.0;
  double achieved_capacity_bps = 0.0;
};

struct PlacementOptions {
  double altitude_min_m = 50.0;
  double altitude_max_m = 500.0;
  double p_floor_w = 1e-9;       // zero-equivalent power floor
  double bisect_rel_tol = 1e-4;
  int nelder_mead_iters = 160;
  int restarts = 5;              // deterministic perturbations beyond the seed
};

/// Smallest power p with eta * T * C(x, p) >= demand, by bisection on
/// (p_floor, p_max]; nothing when the demand is unattainable at p_max.
std::optional<double> min_required_power(const SpatialPoint& x,
                                         double demand_bits, double T_s,
                                         double eta, const Region& hotspot,
                                         const CellField& ue_density,
                                         const ChannelParams& params,
                                         double p_max_w,
                                         const PlacementOptions& opts = {});

/// Service point minimizing the required transmit power, by Nelder-Mead
/// direct search over (x, y, z) seeded at the density centroid and
/// mid-altitude plus deterministic perturbed restarts.
PlacementResult optimal_service_point(const Region& hotspot,
                                      const CellField& ue_density,
                                      double demand_bits, double T_s, double eta,
                                      const ChannelParams& params,
                                      double p_max_w,
                                      const PlacementOptions& opts = {});

}  // namespace uavsim
