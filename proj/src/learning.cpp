#include "learning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace uavsim {

WeightedSamples build_density_samples(const std::vector<TransmissionRecord>& records,
                                      const LearningConfig& config) {
  config.validate();
  if (records.empty()) throw invalid("no transmission records");
  const double h = config.grid_cell_m;
  std::map<std::pair<long, long>, double> acc;
  for (const auto& r : records) {
    if (r.rate_bps < 0.0) throw invalid("negative record rate");
    const long ix = static_cast<long>(std::floor(r.location.x / h));
    const long iy = static_cast<long>(std::floor(r.location.y / h));
    acc[{ix, iy}] += r.rate_bps * config.slot_s / config.learn_window_s;
  }
  WeightedSamples out;
  out.points.reserve(acc.size());
  out.weights.reserve(acc.size());
  for (const auto& [cell, w] : acc) {
    out.points.push_back({(cell.first + 0.5) * h, (cell.second + 0.5) * h});
    out.weights.push_back(w);
  }
  return out;
}

MixtureModel estimate_ue_distribution(const std::vector<TransmissionRecord>& records,
                                      int num_components, uint64_t seed,
                                      const FitOptions& opts) {
  if (records.empty()) throw invalid("no transmission records");
  WeightedSamples samples;
  samples.points.reserve(records.size());
  for (const auto& r : records) samples.points.push_back(r.location);
  return em_fit(samples, num_components, opts, seed);
}

MixtureModel estimate_traffic_density(const std::vector<TransmissionRecord>& records,
                                      int num_components,
                                      const LearningConfig& config,
                                      const FitOptions& opts) {
  const WeightedSamples samples = build_density_samples(records, config);
  bool any_positive = false;
  for (double w : samples.weights) any_positive |= w > 0.0;
  if (!any_positive) throw invalid("no positive weight");
  return wem_fit(samples, num_components, opts);
}

Region detect_hotspot(const MixtureModel& density_model, const Region& service_area) {
  density_model.validate();
  if (service_area.empty()) throw invalid("empty service area");
  const double avg_density =
      region_integral(density_model, service_area) / service_area.area();

  // Strongest Gaussian center by surface value.
  double best_value = -1.0;
  Vec2 peak{0.0, 0.0};
  for (const auto& c : density_model.components) {
    const double v = mixture_eval(density_model, c.mean);
    if (v > best_value) {
      best_value = v;
      peak = c.mean;
    }
  }

  // Mask cell holding (or nearest to) the peak.
  int px = -1, py = -1;
  double best_d = std::numeric_limits<double>::infinity();
  service_area.for_each_cell([&](int ix, int iy, Vec2 c) {
    const double d = norm(c - peak);
    if (d < best_d) {
      best_d = d;
      px = ix;
      py = iy;
    }
  });

  // Strictly super-average, with a hair of slack so a flat surface never
  // qualifies through quadrature rounding.
  const double threshold = avg_density * (1.0 + 1e-12);
  Region super = service_area.like();
  service_area.for_each_cell([&](int ix, int iy, Vec2 c) {
    if (mixture_eval(density_model, c) > threshold) super.set_cell(ix, iy);
  });
  if (!super.cell(px, py))
    throw Error(Error::Kind::runtime, "no hotspot: nothing exceeds the area average");
  return super.connected_component(px, py);
}

double predict_demand(const MixtureModel& density_model, const Region& hotspot,
                      double T_s) {
  if (T_s < 0.0) throw invalid("negative interval");
  if (T_s == 0.0) return 0.0;
  return T_s * region_integral(density_model, hotspot);
}

namespace {

// Contiguous row-major partition of the hotspot cells into n groups of
// (nearly) equal demand mass.
std::vector<std::pair<Region, double>> partition_by_demand(
    const Region& hotspot, const CellField& cell_demand, double total, int n) {
  std::vector<std::pair<Region, double>> parts;
  parts.reserve(n);
  Region current = hotspot.like();
  double acc = 0.0, closed = 0.0;
  int closed_parts = 0;
  hotspot.for_each_cell([&](int ix, int iy, Vec2) {
    current.set_cell(ix, iy);
    acc += cell_demand.at(ix, iy);
    const double target = (closed_parts + 1) * total / n;
    const bool last_part = closed_parts == n - 1;
    if (!last_part && closed + acc >= target) {
      parts.emplace_back(current, acc);
      closed += acc;
      acc = 0.0;
      ++closed_parts;
      current = hotspot.like();
    }
  });
  if (!current.empty() || parts.empty()) parts.emplace_back(current, acc);
  return parts;
}

}  // namespace

std::vector<std::pair<Region, double>> split_hotspot(
    const MixtureModel& density_model, const Region& hotspot, double demand_bits,
    const LearningConfig& config, const SplitContext& ctx) {
  config.validate();
  if (hotspot.empty()) throw invalid("empty hotspot");
  if (demand_bits < 0.0) throw invalid("negative demand");
  const double T = config.service_interval_s;
  const double eta = config.efficiency;
  const int cell_count = static_cast<int>(hotspot.count());

  CellField cell_demand;
  cell_demand.region = hotspot;
  cell_demand.values.assign(static_cast<size_t>(hotspot.nx()) * hotspot.ny(), 0.0);
  double total = 0.0;
  hotspot.for_each_cell([&](int ix, int iy, Vec2 c) {
    const double q = T * mixture_eval(density_model, c) * hotspot.cell_area();
    cell_demand.at(ix, iy) = q;
    total += q;
  });
  if (total <= 0.0) throw invalid("hotspot carries no demand");
  // Work in the surface's own mass; demand_bits and total agree within
  // quadrature error for a consistent pipeline.
  const double d = demand_bits > 0.0 ? demand_bits : total;

  // A subarea's capacity never exceeds the best single-point rate, which
  // bounds the smallest N worth trying.
  ChannelParams params = ctx.channel;
  double best_rate = 0.0;
  hotspot.for_each_cell([&](int, int, Vec2 c) {
    const SpatialPoint uav{c.x, c.y, ctx.placement.altitude_min_m};
    best_rate = std::max(best_rate,
                         expected_rate(uav, {c.x, c.y, 0.0}, ctx.p_max_w, params));
  });
  int n_start = best_rate > 0.0
                    ? std::max(1, static_cast<int>(std::floor(d / (eta * T * best_rate))) + 1)
                    : 1;

  auto subarea_ok = [&](const Region& sub, double sub_demand) {
    CellField density = mixture_field(density_model, sub);
    double mass = 0.0;
    sub.for_each_cell([&](int ix, int iy, Vec2) { mass += density.at(ix, iy); });
    if (mass <= 0.0) return false;
    for (auto& v : density.values) v /= mass * sub.cell_area();
    PlacementResult place;
    try {
      place = optimal_service_point(sub, density, sub_demand, T, eta, params,
                                     ctx.p_max_w, ctx.placement);
    } catch (const Error&) {
      return false;
    }
    const double served =
        eta * T * hotspot_capacity(place.service_point, ctx.p_max_w, sub, density, params);
    return sub_demand < served;
  };

  for (int n = n_start; n <= cell_count; ++n) {
    auto parts = partition_by_demand(hotspot, cell_demand, total, n);
    if (static_cast<int>(parts.size()) != n) continue;  // too few cells
    bool ok = true;
    for (const auto& [sub, sub_total] : parts) {
      // Scale surface mass to the caller's demand figure.
      const double sub_demand = sub_total / total * d;
      if (!subarea_ok(sub, sub_demand)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      std::vector<std::pair<Region, double>> out;
      out.reserve(parts.size());
      for (auto& [sub, sub_total] : parts)
        out.emplace_back(std::move(sub), sub_total / total * d);
      return out;
    }
  }
  throw Error(Error::Kind::runtime, "demand unservable");
}

double avg_rate_per_ue(const MixtureModel& density_model, const Region& region,
                       int ue_count) {
  if (ue_count <= 0) throw invalid("UE count must be positive");
  return region_integral(density_model, region) / ue_count;
}

MreResult mre(const std::vector<double>& predicted, const std::vector<double>& actual) {
  if (predicted.size() != actual.size()) throw invalid("entry count mismatch");
  if (predicted.empty()) throw invalid("no entries");
  MreResult out;
  double sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (actual[i] <= 0.0) {
      ++out.skipped;
      continue;
    }
    sum += std::abs(predicted[i] - actual[i]) / actual[i];
    ++out.used;
  }
  if (out.used == 0) throw invalid("all entries had zero actual demand");
  out.mre = sum / out.used;
  return out;
}

double em_demand_baseline(const MixtureModel& ue_model,
                          const std::vector<TransmissionRecord>& records,
                          const Region& hotspot, double T_s,
                          const LearningConfig& config) {
  if (ue_model.kind != MixtureKind::probabilistic)
    throw invalid("EM baseline needs a probabilistic UE model");
  double total_rate = 0.0;
  for (const auto& r : records)
    total_rate += r.rate_bps * config.slot_s / config.learn_window_s;
  return T_s * total_rate * region_integral(ue_model, hotspot);
}

double kmean_demand_baseline(const WeightedSamples& samples, int k,
                             const Region& hotspot, double T_s,
                             const LearningConfig& config) {
  samples.validate();
  if (!samples.weighted()) throw invalid("k-mean baseline needs weighted samples");
  if (k < 1 || k > static_cast<int>(samples.points.size()))
    throw invalid("k exceeds the sample count");
  const double h = config.grid_cell_m;
  const double sample_cell_area = h * h;

  // The observed density field is zero wherever no record fell; the query
  // region's traffic-free sample cells enter the neighbor average as
  // zero-weight observations.
  WeightedSamples field = samples;
  {
    std::set<std::pair<long, long>> occupied;
    for (const auto& p : samples.points)
      occupied.insert({static_cast<long>(std::floor(p.x / h)),
                       static_cast<long>(std::floor(p.y / h))});
    hotspot.for_each_cell([&](int, int, Vec2 c) {
      const double lo_x = c.x - 0.5 * hotspot.cell_size();
      const double lo_y = c.y - 0.5 * hotspot.cell_size();
      for (double sx = lo_x + 0.5 * h; sx < lo_x + hotspot.cell_size(); sx += h)
        for (double sy = lo_y + 0.5 * h; sy < lo_y + hotspot.cell_size(); sy += h) {
          const auto key = std::make_pair(static_cast<long>(std::floor(sx / h)),
                                          static_cast<long>(std::floor(sy / h)));
          if (occupied.insert(key).second) {
            field.points.push_back({sx, sy});
            field.weights.push_back(0.0);
          }
        }
    });
  }

  std::vector<double> dist2(field.points.size());
  double cell_sum = 0.0;
  hotspot.for_each_cell([&](int, int, Vec2 c) {
    for (size_t i = 0; i < field.points.size(); ++i) {
      const Vec2 d = field.points[i] - c;
      dist2[i] = dot(d, d);
    }
    std::vector<size_t> idx(field.points.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(),
                     [&](size_t a, size_t b) {
                       if (dist2[a] != dist2[b]) return dist2[a] < dist2[b];
                       return a < b;
                     });
    double mean_w = 0.0;
    for (int i = 0; i < k; ++i) mean_w += field.weights[idx[i]];
    cell_sum += mean_w / k;
  });
  return T_s * cell_sum * hotspot.cell_area() / sample_cell_area;
}

}  // namespace uavsim
