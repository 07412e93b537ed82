#include "ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace uavsim {

namespace {

constexpr double kEarthRadiusM = 6371000.0;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim spaces and stray carriage returns.
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

bool to_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  try {
    size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

bool to_long(const std::string& s, long& v) {
  double d;
  if (!to_double(s, d)) return false;
  if (d != std::floor(d)) return false;
  v = static_cast<long>(d);
  return true;
}

}  // namespace

ParsedDataset parse_dataset(const std::string& bs_file,
                            const std::string& traffic_file, double byte_scale) {
  ParsedDataset out;
  std::ifstream bsf(bs_file);
  if (!bsf) throw Error(Error::Kind::io, "cannot open BS table: " + bs_file);
  std::string line;
  bool header = true;
  while (std::getline(bsf, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    double id, lon, lat;
    if (fields.size() < 3 || !to_double(fields[0], id) ||
        !to_double(fields[1], lon) || !to_double(fields[2], lat) ||
        lon < -180.0 || lon > 180.0 || lat < -90.0 || lat > 90.0) {
      ++out.dropped_rows;
      continue;
    }
    out.bss.push_back({static_cast<int>(id), lon, lat});
  }

  std::ifstream trf(traffic_file);
  if (!trf) throw Error(Error::Kind::io, "cannot open traffic table: " + traffic_file);
  std::map<std::pair<int, int>, RawTrafficRow> merged;
  header = true;
  while (std::getline(trf, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    double id;
    long hour, users, packets;
    double bytes;
    if (fields.size() < 5 || !to_double(fields[0], id) || !to_long(fields[1], hour) ||
        !to_long(fields[2], users) || !to_long(fields[3], packets) ||
        !to_double(fields[4], bytes) || hour < 0 || users < 0 || packets < 0 ||
        bytes < 0.0) {
      ++out.dropped_rows;
      continue;
    }
    RawTrafficRow row{static_cast<int>(id), static_cast<int>(hour), users, packets,
                      bytes * byte_scale};
    auto [it, inserted] = merged.try_emplace({row.bs_id, row.hour}, row);
    if (!inserted) {
      it->second.ue_count += row.ue_count;
      it->second.packets += row.packets;
      it->second.bytes += row.bytes;
      ++out.merged_rows;
    }
  }
  for (auto& [key, row] : merged) out.traffic.push_back(row);
  if (out.bss.empty() || out.traffic.empty())
    throw Error(Error::Kind::parse, "no valid rows in dataset");
  return out;
}

Vec2 Projection::to_local(double lon_deg, double lat_deg) const {
  const double x = kEarthRadiusM * std::cos(lat0_deg * M_PI / 180.0) *
                   (lon_deg - lon0_deg) * M_PI / 180.0;
  const double y = kEarthRadiusM * (lat_deg - lat0_deg) * M_PI / 180.0;
  return {x, y};
}

void Projection::to_geo(const Vec2& p, double& lon_deg, double& lat_deg) const {
  lon_deg = lon0_deg +
            p.x / (kEarthRadiusM * std::cos(lat0_deg * M_PI / 180.0)) * 180.0 / M_PI;
  lat_deg = lat0_deg + p.y / kEarthRadiusM * 180.0 / M_PI;
}

Projection make_projection(const std::vector<RawBsRecord>& bss) {
  if (bss.empty()) throw invalid("no BS records");
  Projection proj;
  for (const auto& b : bss) {
    proj.lon0_deg += b.longitude_deg / bss.size();
    proj.lat0_deg += b.latitude_deg / bss.size();
  }
  return proj;
}

std::vector<Region> voronoi_regions(const std::vector<Vec2>& sites, Vec2 origin,
                                    double cell_m, int nx, int ny) {
  if (sites.empty()) throw invalid("no sites");
  std::vector<Region> regions;
  regions.reserve(sites.size());
  for (size_t i = 0; i < sites.size(); ++i)
    regions.emplace_back(origin, cell_m, nx, ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 c = regions[0].cell_center(ix, iy);
      size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < sites.size(); ++i) {
        const Vec2 d = sites[i] - c;
        const double dd = dot(d, d);
        if (dd < best_d) {
          best_d = dd;
          best = i;
        }
      }
      regions[best].set_cell(ix, iy);
    }
  return regions;
}

Partition project_and_partition(const std::vector<RawBsRecord>& bss, double cell_m,
                                double pad_m) {
  Partition part;
  part.projection = make_projection(bss);
  std::vector<Vec2> sites;
  for (const auto& b : bss) {
    Vec2 p = part.projection.to_local(b.longitude_deg, b.latitude_deg);
    // Nudge exact duplicates so every site owns at least its own cell.
    for (const auto& q : sites) {
      if (q.x == p.x && q.y == p.y) {
        p.x += 0.01;
        ++part.perturbed_duplicates;
      }
    }
    sites.push_back(p);
    part.positions.push_back({p.x, p.y, 0.0});
  }
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& p : sites) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  const Vec2 origin{x_lo - pad_m, y_lo - pad_m};
  const int nx = std::max(1, static_cast<int>(std::ceil((x_hi - x_lo + 2 * pad_m) / cell_m)));
  const int ny = std::max(1, static_cast<int>(std::ceil((y_hi - y_lo + 2 * pad_m) / cell_m)));
  part.regions = voronoi_regions(sites, origin, cell_m, nx, ny);
  return part;
}

LabelSynthesis synthesize_labels(const ParsedDataset& data, const Partition& part,
                                 const LearningConfig& learning, uint64_t seed) {
  LabelSynthesis out;
  std::map<int, size_t> bs_index;
  for (size_t i = 0; i < data.bss.size(); ++i) bs_index[data.bss[i].bs_id] = i;

  // Per-BS location model: 1-3 Gaussian clusters with random parameters.
  struct LocModel {
    std::vector<double> weight;
    std::vector<Vec2> mean;
    std::vector<double> sigma;
  };
  std::map<int, LocModel> models;
  std::map<int, std::vector<Vec2>> region_cells;
  for (const auto& [id, idx] : bs_index) {
    const Region& reg = part.regions[idx];
    auto& cells = region_cells[id];
    reg.for_each_cell([&](int, int, Vec2 c) { cells.push_back(c); });
    if (cells.empty()) continue;
    std::mt19937_64 rng(seed ^ (0x51ed270b9ull * (id + 1)));
    LocModel m;
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    double wsum = 0.0;
    for (int i = 0; i < k; ++i) {
      m.mean.push_back(cells[std::uniform_int_distribution<size_t>(0, cells.size() - 1)(rng)]);
      m.sigma.push_back(std::uniform_real_distribution<double>(20.0, 80.0)(rng));
      m.weight.push_back(std::uniform_real_distribution<double>(0.5, 1.0)(rng));
      wsum += m.weight.back();
    }
    for (auto& w : m.weight) w /= wsum;
    models[id] = std::move(m);
  }

  std::map<int, std::vector<TransmissionRecord>> streams;
  for (const auto& row : data.traffic) {
    auto it = bs_index.find(row.bs_id);
    if (it == bs_index.end()) {
      continue;  // traffic for a BS missing from the table
    }
    if (row.packets == 0) {
      if (row.bytes > 0.0) ++out.skipped_hours;
      continue;
    }
    const Region& reg = part.regions[it->second];
    const auto& cells = region_cells[row.bs_id];
    const LocModel& m = models[row.bs_id];
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (row.bs_id + 1)) ^
                        (0x7f4a7c15ull * (row.hour + 1)));
    std::normal_distribution<double> noise(0.0, 3.0);
    const double bits_per_packet = row.bytes * 8.0 / row.packets;
    for (long p = 0; p < row.packets; ++p) {
      const double t = row.hour * 3600.0 +
                       std::uniform_int_distribution<int>(0, 3599)(rng);
      // Pick a cluster, draw a location, clip into the service region.
      double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      size_t ci = 0;
      for (; ci + 1 < m.weight.size() && u > m.weight[ci]; ++ci) u -= m.weight[ci];
      std::normal_distribution<double> gx(m.mean[ci].x, m.sigma[ci]);
      std::normal_distribution<double> gy(m.mean[ci].y, m.sigma[ci]);
      Vec2 loc{gx(rng) + noise(rng), gy(rng) + noise(rng)};
      if (!reg.contains(loc)) {
        double best = std::numeric_limits<double>::infinity();
        Vec2 snap = loc;
        for (const auto& c : cells) {
          const Vec2 d = c - loc;
          const double dd = dot(d, d);
          if (dd < best) {
            best = dd;
            snap = c;
          }
        }
        loc = snap;
      }
      streams[row.bs_id].push_back({bits_per_packet / learning.slot_s, loc, t});
    }
  }
  for (auto& [id, records] : streams) {
    std::sort(records.begin(), records.end(),
              [](const TransmissionRecord& a, const TransmissionRecord& b) {
                if (a.time_s != b.time_s) return a.time_s < b.time_s;
                if (a.location.x != b.location.x) return a.location.x < b.location.x;
                return a.location.y < b.location.y;
              });
    out.streams.push_back({id, std::move(records)});
  }
  return out;
}

std::vector<double> city_hourly_series(const ParsedDataset& data) {
  int max_hour = 0;
  for (const auto& row : data.traffic) max_hour = std::max(max_hour, row.hour);
  std::vector<double> series(max_hour + 1, 0.0);
  for (const auto& row : data.traffic) series[row.hour] += row.bytes;
  return series;
}

SyntheticScenario synthetic_scenario(const SynthSpec& spec,
                                     const EconomicParams& econ,
                                     const ChannelParams& channel,
                                     const LearningConfig& learning,
                                     const SimParams& sim, uint64_t seed) {
  if (spec.bs_cols < 1 || spec.bs_rows < 1) throw invalid("bad BS grid");
  if (spec.rho_ratio <= 0.0) throw invalid("rho ratio must be positive");
  const int bs_count = spec.bs_cols * spec.bs_rows;
  const double q_bg = spec.background_ue_per_bs;
  const double q_hot = spec.hotspot_ue_count;
  const double q_all = q_bg + q_hot;
  // Per-UE rate multiplier that realizes the requested hotspot-to-average
  // rate ratio; bounded by the hotspot UE share.
  const double denom = q_all - spec.rho_ratio * q_hot;
  if (denom <= 0.0)
    throw invalid("rho ratio unreachable with this UE split");
  const double multiplier = spec.rho_ratio * q_bg / denom;

  std::mt19937_64 rng(seed);
  SyntheticScenario out;
  Scenario& sc = out.scenario;
  sc.seed = seed;
  sc.econ = econ;
  sc.channel = channel;
  sc.learning = learning;
  sc.sim = sim;

  // Jittered BS grid and its Voronoi partition.
  std::vector<Vec2> sites;
  const double w = spec.bs_cols * spec.bs_spacing_m;
  const double h = spec.bs_rows * spec.bs_spacing_m;
  for (int r = 0; r < spec.bs_rows; ++r)
    for (int c = 0; c < spec.bs_cols; ++c) {
      std::uniform_real_distribution<double> jit(-0.12 * spec.bs_spacing_m,
                                                 0.12 * spec.bs_spacing_m);
      sites.push_back({(c + 0.5) * spec.bs_spacing_m + jit(rng),
                       (r + 0.5) * spec.bs_spacing_m + jit(rng)});
    }
  const int nx = static_cast<int>(std::ceil(w / spec.cell_m));
  const int ny = static_cast<int>(std::ceil(h / spec.cell_m));
  auto regions = voronoi_regions(sites, {0.0, 0.0}, spec.cell_m, nx, ny);

  const double bg_total = q_bg * spec.background_rate_per_ue_bps;
  const double capacity =
      spec.bs_capacity_bps > 0.0 ? spec.bs_capacity_bps : 1.3 * bg_total;
  for (int i = 0; i < bs_count; ++i) {
    sc.bss.push_back({i, {sites[i].x, sites[i].y, 0.0}, regions[i], capacity});
    sc.stations.push_back({{sites[i].x, sites[i].y, 0.0}});
  }

  // Fleet scattered over the map, partially charged.
  for (int j = 0; j < spec.fleet_size; ++j) {
    std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h);
    std::uniform_real_distribution<double> ue(spec.min_initial_energy_fraction, 1.0);
    UavProfile u;
    u.id = j;
    u.position = {ux(rng), uy(rng), spec.uav_altitude_m};
    u.speed_m_s = spec.uav_speed_m_s;
    u.energy_j = ue(rng) * spec.full_energy_j;
    sc.fleet.push_back(u);
  }
  sc.sim.full_energy_j = spec.full_energy_j;

  // Background UEs per BS, fixed positions, periodic transmissions.
  const double tick_bg = spec.background_interval_s;
  const double tick_hot = spec.hotspot_interval_s;
  for (int i = 0; i < bs_count; ++i) {
    std::vector<TransmissionRecord> records;
    std::vector<Vec2> cells;
    regions[i].for_each_cell([&](int, int, Vec2 c) { cells.push_back(c); });
    std::mt19937_64 brng(seed ^ (0xc2b2ae3d27d4eb4full * (i + 1)));
    for (int ueq = 0; ueq < spec.background_ue_per_bs; ++ueq) {
      const Vec2 base = cells[std::uniform_int_distribution<size_t>(0, cells.size() - 1)(brng)];
      std::normal_distribution<double> jitter(0.0, spec.cell_m * 0.4);
      Vec2 pos{base.x + jitter(brng), base.y + jitter(brng)};
      // Poisson arrivals with exponentially sized transmissions keep the
      // long-run mean at the per-UE rate while leaving sampling noise in
      // any finite window.
      std::exponential_distribution<double> gap(1.0 / tick_bg);
      std::exponential_distribution<double> size(1.0);
      const double mean_rate =
          spec.background_rate_per_ue_bps * tick_bg / learning.slot_s;
      for (double t = gap(brng); t < spec.horizon_s; t += gap(brng))
        records.push_back({mean_rate * size(brng), pos, std::floor(t)});
    }

    // Hotspot episodes on this BS.
    const double period = spec.horizon_s / spec.events_per_bs;
    for (int e = 0; e < spec.events_per_bs; ++e) {
      const double offset = period * (static_cast<double>(i) / bs_count);
      const double start =
          e * period + offset +
          std::uniform_real_distribution<double>(0.0, 0.05 * period)(brng);
      const double stop = start + learning.learn_window_s +
                          learning.service_interval_s + 240.0;
      if (stop > spec.horizon_s) continue;
      EventTruth truth;
      truth.bs_id = i;
      truth.start_s = start;
      truth.sigma_m = spec.hotspot_sigma_m;
      std::vector<Vec2> centers;
      const double max_offset = spec.hotspot_offset_fraction * spec.bs_spacing_m;
      for (int cl = 0; cl < std::max(1, spec.num_clusters); ++cl) {
        Vec2 c{0, 0};
        for (int attempt = 0; attempt < 64; ++attempt) {
          const double ang = std::uniform_real_distribution<double>(0.0, 2 * M_PI)(brng);
          const double rad = max_offset * std::sqrt(
              std::uniform_real_distribution<double>(0.0, 1.0)(brng));
          c = {sites[i].x + rad * std::cos(ang), sites[i].y + rad * std::sin(ang)};
          if (regions[i].contains(c)) break;
          c = sites[i];
        }
        centers.push_back(c);
      }
      truth.center = centers[0];
      const double per_ue_rate = multiplier * spec.background_rate_per_ue_bps;
      truth.hotspot_rate_bps = q_hot * per_ue_rate;
      truth.measured_rho_ratio =
          (q_all * multiplier) / (q_bg + q_hot * multiplier);
      for (int ueq = 0; ueq < spec.hotspot_ue_count; ++ueq) {
        const Vec2& c = centers[ueq % centers.size()];
        std::normal_distribution<double> gx(c.x, spec.hotspot_sigma_m);
        std::normal_distribution<double> gy(c.y, spec.hotspot_sigma_m);
        Vec2 pos{gx(brng), gy(brng)};
        if (!regions[i].contains(pos)) pos = c;
        std::exponential_distribution<double> gap(1.0 / tick_hot);
        std::exponential_distribution<double> size(1.0);
        const double mean_rate = per_ue_rate * tick_hot / learning.slot_s;
        for (double t = start + gap(brng); t < stop; t += gap(brng))
          records.push_back({mean_rate * size(brng), pos, std::floor(t)});
      }
      out.truths.push_back(truth);
    }

    std::sort(records.begin(), records.end(),
              [](const TransmissionRecord& a, const TransmissionRecord& b) {
                if (a.time_s != b.time_s) return a.time_s < b.time_s;
                if (a.location.x != b.location.x) return a.location.x < b.location.x;
                return a.location.y < b.location.y;
              });
    sc.streams.push_back({i, std::move(records)});
  }
  return out;
}

}  // namespace uavsim
