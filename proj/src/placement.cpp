#include "placement.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace uavsim {

namespace {

struct Bounds {
  double x_lo, x_hi, y_lo, y_hi, z_lo, z_hi;

  SpatialPoint clamp(SpatialPoint p) const {
    p.x = std::clamp(p.x, x_lo, x_hi);
    p.y = std::clamp(p.y, y_lo, y_hi);
    p.z = std::clamp(p.z, z_lo, z_hi);
    return p;
  }
};

Bounds region_bounds(const Region& hotspot, const PlacementOptions& opts) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  hotspot.for_each_cell([&](int, int, Vec2 c) {
    x_lo = std::min(x_lo, c.x);
    x_hi = std::max(x_hi, c.x);
    y_lo = std::min(y_lo, c.y);
    y_hi = std::max(y_hi, c.y);
  });
  // Allow the service point anywhere over the hotspot's neighborhood.
  const double pad = 4.0 * hotspot.cell_size() + 50.0;
  return {x_lo - pad, x_hi + pad, y_lo - pad, y_hi + pad,
          opts.altitude_min_m, opts.altitude_max_m};
}

}  // namespace

std::optional<double> min_required_power(const SpatialPoint& x,
                                         double demand_bits, double T_s,
                                         double eta, const Region& hotspot,
                                         const CellField& ue_density,
                                         const ChannelParams& params,
                                         double p_max_w,
                                         const PlacementOptions& opts) {
  if (demand_bits < 0.0) throw invalid("negative demand");
  const CapacityProfile profile(x, hotspot, ue_density, params);
  auto served = [&](double p) { return eta * T_s * profile.capacity(p); };
  if (demand_bits <= 0.0) return opts.p_floor_w;
  if (served(p_max_w) < demand_bits) return std::nullopt;
  if (served(opts.p_floor_w) >= demand_bits) return opts.p_floor_w;
  double lo = opts.p_floor_w, hi = p_max_w;
  while (hi - lo > opts.bisect_rel_tol * hi && hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (served(mid) >= demand_bits)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

PlacementResult optimal_service_point(const Region& hotspot,
                                      const CellField& ue_density,
                                      double demand_bits, double T_s, double eta,
                                      const ChannelParams& params,
                                      double p_max_w,
                                      const PlacementOptions& opts) {
  if (hotspot.empty()) throw invalid("empty hotspot region");
  const Bounds bounds = region_bounds(hotspot, opts);

  // Infeasible points rank behind every feasible one, ordered by shortfall.
  auto objective = [&](const SpatialPoint& raw) {
    const SpatialPoint p = bounds.clamp(raw);
    const auto power = min_required_power(p, demand_bits, T_s, eta, hotspot,
                                          ue_density, params, p_max_w, opts);
    if (power) return *power;
    const double cap = hotspot_capacity(p, p_max_w, hotspot, ue_density, params);
    const double shortfall = demand_bits / std::max(eta * T_s * cap, 1e-300);
    return p_max_w * (1.0 + std::min(shortfall, 1e6));
  };

  // Density centroid seed.
  Vec2 centroid{0.0, 0.0};
  double mass = 0.0;
  hotspot.for_each_cell([&](int ix, int iy, Vec2 c) {
    const double w = ue_density.at(ix, iy);
    centroid = centroid + c * w;
    mass += w;
  });
  if (mass <= 0.0) throw invalid("ue_density has no mass on the hotspot");
  centroid = centroid * (1.0 / mass);
  const double z_mid = 0.5 * (opts.altitude_min_m + opts.altitude_max_m);
  const double spread =
      std::max({bounds.x_hi - bounds.x_lo, bounds.y_hi - bounds.y_lo, 40.0});

  std::vector<SpatialPoint> starts;
  starts.push_back({centroid.x, centroid.y, z_mid});
  const std::array<std::array<double, 3>, 5> offsets{{
      {0.25, 0.0, -0.3},
      {-0.25, 0.0, 0.3},
      {0.0, 0.25, -0.15},
      {0.0, -0.25, 0.15},
      {0.15, 0.15, -0.45},
  }};
  for (int r = 0; r < std::min<int>(opts.restarts, offsets.size()); ++r) {
    starts.push_back({centroid.x + offsets[r][0] * spread,
                      centroid.y + offsets[r][1] * spread,
                      z_mid + offsets[r][2] * (opts.altitude_max_m - z_mid)});
  }

  auto nelder_mead = [&](SpatialPoint start) {
    struct Vertex {
      SpatialPoint p;
      double f;
    };
    const double hx = 0.2 * spread, hz = 0.25 * (opts.altitude_max_m - opts.altitude_min_m);
    std::array<Vertex, 4> simplex;
    simplex[0] = {start, objective(start)};
    simplex[1] = {{start.x + hx, start.y, start.z}, 0.0};
    simplex[2] = {{start.x, start.y + hx, start.z}, 0.0};
    simplex[3] = {{start.x, start.y, start.z + hz}, 0.0};
    for (int i = 1; i < 4; ++i) simplex[i].f = objective(simplex[i].p);

    auto by_f = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    for (int it = 0; it < opts.nelder_mead_iters; ++it) {
      std::sort(simplex.begin(), simplex.end(), by_f);
      if (std::abs(simplex[3].f - simplex[0].f) <
          1e-6 * (1.0 + std::abs(simplex[0].f)))
        break;
      SpatialPoint cen{0.0, 0.0, 0.0};
      for (int i = 0; i < 3; ++i) {
        cen.x += simplex[i].p.x / 3.0;
        cen.y += simplex[i].p.y / 3.0;
        cen.z += simplex[i].p.z / 3.0;
      }
      auto blend = [&](double coef) {
        const SpatialPoint& w = simplex[3].p;
        return SpatialPoint{cen.x + coef * (cen.x - w.x),
                            cen.y + coef * (cen.y - w.y),
                            cen.z + coef * (cen.z - w.z)};
      };
      const SpatialPoint refl = blend(1.0);
      const double f_refl = objective(refl);
      if (f_refl < simplex[0].f) {
        const SpatialPoint exp_p = blend(2.0);
        const double f_exp = objective(exp_p);
        simplex[3] = f_exp < f_refl ? Vertex{exp_p, f_exp} : Vertex{refl, f_refl};
      } else if (f_refl < simplex[2].f) {
        simplex[3] = {refl, f_refl};
      } else {
        const SpatialPoint con = blend(-0.5);
        const double f_con = objective(con);
        if (f_con < simplex[3].f) {
          simplex[3] = {con, f_con};
        } else {
          for (int i = 1; i < 4; ++i) {
            simplex[i].p = {0.5 * (simplex[i].p.x + simplex[0].p.x),
                            0.5 * (simplex[i].p.y + simplex[0].p.y),
                            0.5 * (simplex[i].p.z + simplex[0].p.z)};
            simplex[i].f = objective(simplex[i].p);
          }
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(), by_f);
    return std::make_pair(bounds.clamp(simplex[0].p), simplex[0].f);
  };

  PlacementResult best;
  best.min_power_w = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    auto [point, value] = nelder_mead(bounds.clamp(start));
    if (value < best.min_power_w) {
      best.min_power_w = value;
      best.service_point = point;
    }
  }
  if (best.min_power_w > p_max_w)
    throw Error(Error::Kind::runtime, "no feasible placement");
  best.achieved_capacity_bps = hotspot_capacity(
      best.service_point, best.min_power_w, hotspot, ue_density, params);
  return best;
}

}  // namespace uavsim
