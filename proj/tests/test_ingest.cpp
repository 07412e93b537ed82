#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "ingest.hpp"

using namespace uavsim;

namespace {

std::string write_tmp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/uavsim_test_" + name;
  std::ofstream f(path, std::ios::trunc);
  f << content;
  return path;
}

}  // namespace

TEST_CASE("parse_dataset validates, drops and merges rows") {
  const std::string bs = write_tmp(
      "bs.csv", "id,longitude,latitude\n1,116.30,39.90\n2,116.35,39.95\nbad,x,y\n");
  const std::string traffic = write_tmp("traffic.csv",
                                        "id,hour,users,packets,bytes\n"
                                        "1,0,10,5,1000\n"
                                        "1,0,2,3,500\n"
                                        "2,0,4,2,-10\n"
                                        "2,1,4,2,800\n");
  ParsedDataset d = parse_dataset(bs, traffic);
  CHECK(d.bss.size() == 2);
  CHECK(d.dropped_rows == 2);  // bad BS row + negative bytes
  CHECK(d.merged_rows == 1);
  REQUIRE(d.traffic.size() == 2);
  CHECK(d.traffic[0].packets == 8);
  CHECK(d.traffic[0].bytes == doctest::Approx(1500.0));

  CHECK_THROWS_AS(parse_dataset("/nonexistent.csv", traffic), Error);
  const std::string empty = write_tmp("empty.csv", "id,hour,users,packets,bytes\n");
  CHECK_THROWS_AS(parse_dataset(bs, empty), Error);
}

TEST_CASE("projection round-trips within a meter") {
  std::vector<RawBsRecord> bss{{1, 116.30, 39.90}, {2, 116.40, 39.95}};
  Projection proj = make_projection(bss);
  for (const auto& b : bss) {
    const Vec2 p = proj.to_local(b.longitude_deg, b.latitude_deg);
    double lon, lat;
    proj.to_geo(p, lon, lat);
    const Vec2 back = proj.to_local(lon, lat);
    CHECK(std::hypot(back.x - p.x, back.y - p.y) < 1.0);
  }
}

TEST_CASE("voronoi partition matches a brute-force nearest scan") {
  std::vector<Vec2> sites{{100, 100}, {700, 150}, {420, 600}};
  auto regions = voronoi_regions(sites, {0, 0}, 20.0, 40, 40);
  REQUIRE(regions.size() == 3);
  size_t total = 0;
  for (size_t i = 0; i < 3; ++i) {
    regions[i].for_each_cell([&](int ix, int iy, Vec2 c) {
      size_t best = 0;
      double best_d = 1e300;
      for (size_t k = 0; k < 3; ++k) {
        const Vec2 d = sites[k] - c;
        if (dot(d, d) < best_d) {
          best_d = dot(d, d);
          best = k;
        }
      }
      CHECK(best == i);
    });
    total += regions[i].count();
  }
  CHECK(total == 1600);  // disjoint cover of the whole grid

  SUBCASE("two sites split along the perpendicular bisector") {
    std::vector<Vec2> two{{100, 100}, {300, 100}};
    auto pair = voronoi_regions(two, {0, 0}, 10.0, 40, 20);
    pair[0].for_each_cell([&](int, int, Vec2 c) { CHECK(c.x < 200.0); });
    pair[1].for_each_cell([&](int, int, Vec2 c) { CHECK(c.x > 200.0); });
  }

  SUBCASE("a single site owns the whole box") {
    auto one = voronoi_regions({{50, 50}}, {0, 0}, 10.0, 12, 9);
    CHECK(one[0].count() == 12u * 9u);
  }
}

TEST_CASE("duplicate BS positions are perturbed") {
  std::vector<RawBsRecord> bss{{1, 116.30, 39.90}, {2, 116.30, 39.90}};
  Partition part = project_and_partition(bss, 25.0, 100.0);
  CHECK(part.perturbed_duplicates == 1);
  CHECK(part.regions[0].count() > 0);
  CHECK(part.regions[1].count() > 0);
}

TEST_CASE("label synthesis conserves bytes and stays inside regions") {
  const std::string bs = write_tmp(
      "bs2.csv", "id,longitude,latitude\n1,116.30,39.90\n2,116.34,39.93\n");
  const std::string traffic = write_tmp("traffic2.csv",
                                        "id,hour,users,packets,bytes\n"
                                        "1,0,30,1000,250000\n"
                                        "1,1,30,0,999\n"
                                        "2,0,20,400,90000\n");
  ParsedDataset d = parse_dataset(bs, traffic);
  Partition part = project_and_partition(d.bss, 25.0, 300.0);
  LearningConfig learning;
  LabelSynthesis out = synthesize_labels(d, part, learning, 42);
  CHECK(out.skipped_hours == 1);

  std::map<int, double> bits;
  std::map<int, int> counts;
  for (const auto& s : out.streams) {
    const Region& reg = part.regions[s.bs_id == 1 ? 0 : 1];
    for (const auto& r : s.records) {
      bits[s.bs_id] += r.rate_bps * learning.slot_s;
      counts[s.bs_id] += 1;
      CHECK(reg.contains(r.location));
      CHECK(r.time_s >= 0.0);
      CHECK(r.time_s < 2 * 3600.0);
    }
  }
  CHECK(counts[1] == 1000);  // one record per packet
  CHECK(counts[2] == 400);
  CHECK(bits[1] == doctest::Approx(250000.0 * 8).epsilon(1e-9));
  CHECK(bits[2] == doctest::Approx(90000.0 * 8).epsilon(1e-9));

  LabelSynthesis again = synthesize_labels(d, part, learning, 42);
  REQUIRE(again.streams.size() == out.streams.size());
  for (size_t i = 0; i < out.streams.size(); ++i) {
    REQUIRE(again.streams[i].records.size() == out.streams[i].records.size());
    for (size_t k = 0; k < out.streams[i].records.size(); ++k) {
      CHECK(again.streams[i].records[k].time_s == out.streams[i].records[k].time_s);
      CHECK(again.streams[i].records[k].location.x ==
            out.streams[i].records[k].location.x);
    }
  }
}

TEST_CASE("synthetic scenario: reproducible, valid, truthful ratio") {
  {
    SynthSpec spec;
    spec.fleet_size = 0;
    spec.horizon_s = 6000.0;
    spec.events_per_bs = 1;
    EconomicParams econ;
    ChannelParams channel;
    LearningConfig learning;
    SimParams sim;

    SUBCASE("empty fleet is a valid scenario") {
      auto s = synthetic_scenario(spec, econ, channel, learning, sim, 4);
      CHECK_NOTHROW(s.scenario.validate());
      CHECK(s.scenario.fleet.empty());
      CHECK_FALSE(s.truths.empty());
    }

    SUBCASE("fixed seed reproduces the record streams") {
      auto a = synthetic_scenario(spec, econ, channel, learning, sim, 9);
      auto b = synthetic_scenario(spec, econ, channel, learning, sim, 9);
      REQUIRE(a.scenario.streams.size() == b.scenario.streams.size());
      for (size_t i = 0; i < a.scenario.streams.size(); ++i) {
        const auto& ra = a.scenario.streams[i].records;
        const auto& rb = b.scenario.streams[i].records;
        REQUIRE(ra.size() == rb.size());
        for (size_t k = 0; k < ra.size(); ++k) {
          CHECK(ra[k].time_s == rb[k].time_s);
          CHECK(ra[k].rate_bps == rb[k].rate_bps);
        }
      }
    }

    SUBCASE("ratio-1 generation keeps hotspot and average per-UE rates equal") {
      SynthSpec even = spec;
      even.rho_ratio = 1.0;
      auto s = synthetic_scenario(even, econ, channel, learning, sim, 8);
      // Measured per-UE rates from the generated records around one event.
      const auto& truth = s.truths.front();
      const auto& stream = s.scenario.stream_for(truth.bs_id);
      std::map<std::pair<long, long>, double> rate_at;
      const double h = learning.grid_cell_m;
      double window = 600.0;
      for (const auto& r : stream.records) {
        if (r.time_s <= truth.start_s || r.time_s > truth.start_s + window) continue;
        rate_at[{static_cast<long>(std::floor(r.location.x / h)),
                 static_cast<long>(std::floor(r.location.y / h))}] +=
            r.rate_bps / window;
      }
      double hot = 0.0, all = 0.0;
      int hot_n = 0, all_n = 0;
      for (const auto& [cell, rate] : rate_at) {
        const Vec2 c{(cell.first + 0.5) * h, (cell.second + 0.5) * h};
        all += rate;
        ++all_n;
        if (norm(c - truth.center) < 3 * truth.sigma_m) {
          hot += rate;
          ++hot_n;
        }
      }
      REQUIRE(hot_n > 0);
      const double measured = (hot / hot_n) / (all / all_n);
      CHECK(measured == doctest::Approx(1.0).epsilon(0.25));
      CHECK(s.truths.front().measured_rho_ratio == doctest::Approx(1.0));
    }

    SUBCASE("unreachable ratio is rejected") {
      SynthSpec bad = spec;
      bad.rho_ratio = 40.0;  // above the UE-share bound
      CHECK_THROWS_AS(synthetic_scenario(bad, econ, channel, learning, sim, 1),
                      Error);
    }
  }
}

TEST_CASE("city series aggregates per hour") {
  ParsedDataset d;
  d.bss.push_back({1, 0, 0});
  d.traffic = {{1, 0, 1, 1, 100.0}, {1, 2, 1, 1, 50.0}, {2, 2, 1, 1, 25.0}};
  auto series = city_hourly_series(d);
  REQUIRE(series.size() == 3);
  CHECK(series[0] == 100.0);
  CHECK(series[1] == 0.0);
  CHECK(series[2] == 75.0);
}
