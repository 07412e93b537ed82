#pragma once

#include <cstdint>
#include <optional>

#include "geometry.hpp"

namespace uavsim {

enum class LinkClass { los, nlos };

/// Air-to-ground channel parameters. Excess path loss is Gaussian per link
/// class; mean mode uses the mu values, sample mode draws with the sigmas.
struct ChannelParams {
  double carrier_hz = 2.0e9;
  double bandwidth_hz = 20.0e6;
  double noise_psd_dbm_hz = -174.0;
  double antenna_gain_linear = 1.0;
  double los_a = 9.6;
  double los_b = 0.28;
  double excess_loss_los_mu_db = 1.6;
  double excess_loss_los_sigma_db = 8.41;
  double excess_loss_nlos_mu_db = 23.0;
  double excess_loss_nlos_sigma_db = 33.78;
  double light_speed_m_s = 3.0e8;

  void validate() const;

  /// Noise power over the downlink bandwidth, in watts.
  double noise_power_w() const {
    return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
  }
};

/// How the Gaussian excess-loss term is treated: its mean, or a seeded draw.
struct ExcessLossMode {
  static ExcessLossMode mean() { return {false, 0}; }
  static ExcessLossMode sample(uint64_t seed) { return {true, seed}; }
  bool sampled = false;
  uint64_t seed = 0;
};

/// Elevation angle from the UE to the UAV, radians in [-pi/2, pi/2].
double elevation_angle(const SpatialPoint& uav, const SpatialPoint& ue);

/// Air-to-ground path loss in dB: free space at the carrier plus the excess
/// loss of the link class.
double path_loss_db(const SpatialPoint& uav, const SpatialPoint& ue,
                    LinkClass link, const ChannelParams& params,
                    const ExcessLossMode& mode = ExcessLossMode::mean());

/// Probability of a LOS link given the elevation angle.
double los_probability(const SpatialPoint& uav, const SpatialPoint& ue,
                       const ChannelParams& params);

/// Instantaneous rate under a fixed link class, bits/s.
double link_rate(const SpatialPoint& uav, const SpatialPoint& ue,
                 double power_w, LinkClass link, const ChannelParams& params,
                 const ExcessLossMode& mode = ExcessLossMode::mean());

/// LOS/NLOS-averaged downlink rate, bits/s, with mean excess loss.
double expected_rate(const SpatialPoint& uav, const SpatialPoint& ue,
                     double power_w, const ChannelParams& params);

/// Average rate the UAV provides to a hotspot: quadrature of expected_rate
/// against the normalized UE density over the hotspot cells.
double hotspot_capacity(const SpatialPoint& uav, double power_w,
                        const Region& hotspot, const CellField& ue_density,
                        const ChannelParams& params);

/// Per-cell SNR coefficients of one UAV position over a hotspot, so that
/// repeated capacity evaluations at different powers cost one log2 per
/// cell. capacity(p) equals hotspot_capacity(x, p, ...) exactly.
class CapacityProfile {
 public:
  CapacityProfile(const SpatialPoint& uav, const Region& hotspot,
                  const CellField& ue_density, const ChannelParams& params);
  double capacity(double power_w) const;

 private:
  struct Cell {
    double k_los;   // SNR per watt on the LOS path
    double k_nlos;
    double p_los;
    double mass;    // density x cell area
  };
  std::vector<Cell> cells_;
  double bandwidth_hz_;
};

}  // namespace uavsim
