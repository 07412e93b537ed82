#include "channel.hpp"

#include <cmath>
#include <random>

namespace uavsim {

void ChannelParams::validate() const {
  if (carrier_hz <= 0.0) throw invalid("carrier_hz must be positive");
  if (bandwidth_hz <= 0.0) throw invalid("bandwidth_hz must be positive");
  if (antenna_gain_linear <= 0.0) throw invalid("antenna gain must be positive");
  if (los_a <= 0.0 || los_b <= 0.0) throw invalid("LOS model constants must be positive");
  if (excess_loss_los_sigma_db < 0.0 || excess_loss_nlos_sigma_db < 0.0)
    throw invalid("excess loss sigma must be nonnegative");
  if (light_speed_m_s <= 0.0) throw invalid("light speed must be positive");
}

double elevation_angle(const SpatialPoint& uav, const SpatialPoint& ue) {
  const double d = distance(uav, ue);
  if (d <= 0.0) throw invalid("degenerate geometry: coincident UAV and UE");
  return std::asin((uav.z - ue.z) / d);
}

double path_loss_db(const SpatialPoint& uav, const SpatialPoint& ue,
                    LinkClass link, const ChannelParams& params,
                    const ExcessLossMode& mode) {
  const double d = distance(uav, ue);
  if (d <= 0.0) throw invalid("degenerate geometry: zero distance");
  const double fspl =
      20.0 * std::log10(4.0 * M_PI * params.carrier_hz * d / params.light_speed_m_s);
  const double mu = link == LinkClass::los ? params.excess_loss_los_mu_db
                                           : params.excess_loss_nlos_mu_db;
  const double sigma = link == LinkClass::los ? params.excess_loss_los_sigma_db
                                              : params.excess_loss_nlos_sigma_db;
  double excess = mu;
  if (mode.sampled) {
    std::mt19937_64 rng(mode.seed);
    std::normal_distribution<double> gauss(mu, sigma);
    excess = gauss(rng);
  }
  return fspl + excess;
}

double los_probability(const SpatialPoint& uav, const SpatialPoint& ue,
                       const ChannelParams& params) {
  const double phi_deg = elevation_angle(uav, ue) * 180.0 / M_PI;
  return 1.0 / (1.0 + params.los_a *
                          std::exp(-params.los_b * (phi_deg - params.los_a)));
}

double link_rate(const SpatialPoint& uav, const SpatialPoint& ue,
                 double power_w, LinkClass link, const ChannelParams& params,
                 const ExcessLossMode& mode) {
  if (power_w < 0.0) throw invalid("negative transmit power");
  if (power_w == 0.0) return 0.0;
  const double h_lin = std::pow(10.0, path_loss_db(uav, ue, link, params, mode) / 10.0);
  const double snr =
      params.antenna_gain_linear * power_w / (h_lin * params.noise_power_w());
  return params.bandwidth_hz * std::log2(1.0 + snr);
}

double expected_rate(const SpatialPoint& uav, const SpatialPoint& ue,
                     double power_w, const ChannelParams& params) {
  const double p_los = los_probability(uav, ue, params);
  const double r_los = link_rate(uav, ue, power_w, LinkClass::los, params);
  const double r_nlos = link_rate(uav, ue, power_w, LinkClass::nlos, params);
  return p_los * r_los + (1.0 - p_los) * r_nlos;
}

double hotspot_capacity(const SpatialPoint& uav, double power_w,
                        const Region& hotspot, const CellField& ue_density,
                        const ChannelParams& params) {
  return CapacityProfile(uav, hotspot, ue_density, params).capacity(power_w);
}

CapacityProfile::CapacityProfile(const SpatialPoint& uav, const Region& hotspot,
                                 const CellField& ue_density,
                                 const ChannelParams& params)
    : bandwidth_hz_(params.bandwidth_hz) {
  if (hotspot.empty()) throw invalid("empty hotspot region");
  if (!ue_density.region.same_grid(hotspot)) throw invalid("density grid mismatch");
  double mass = 0.0;
  hotspot.for_each_cell([&](int ix, int iy, Vec2) { mass += ue_density.at(ix, iy); });
  mass *= hotspot.cell_area();
  if (std::abs(mass - 1.0) > 1e-3)
    throw invalid("ue_density must integrate to 1 over the hotspot");
  const double noise = params.noise_power_w();
  cells_.reserve(hotspot.count());
  hotspot.for_each_cell([&](int ix, int iy, Vec2 c) {
    const SpatialPoint ue{c.x, c.y, 0.0};
    const double h_los = std::pow(
        10.0, path_loss_db(uav, ue, LinkClass::los, params) / 10.0);
    const double h_nlos = std::pow(
        10.0, path_loss_db(uav, ue, LinkClass::nlos, params) / 10.0);
    cells_.push_back({params.antenna_gain_linear / (h_los * noise),
                      params.antenna_gain_linear / (h_nlos * noise),
                      los_probability(uav, ue, params),
                      ue_density.at(ix, iy) * hotspot.cell_area()});
  });
}

double CapacityProfile::capacity(double power_w) const {
  if (power_w < 0.0) throw invalid("negative transmit power");
  if (power_w == 0.0) return 0.0;
  double cap = 0.0;
  for (const auto& c : cells_) {
    const double r_los = std::log2(1.0 + c.k_los * power_w);
    const double r_nlos = std::log2(1.0 + c.k_nlos * power_w);
    cap += (c.p_los * r_los + (1.0 - c.p_los) * r_nlos) * c.mass;
  }
  return cap * bandwidth_hz_;
}

}  // namespace uavsim
