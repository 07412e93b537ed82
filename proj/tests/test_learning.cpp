#include <cmath>
#include <random>

#include "doctest.h"
#include "learning.hpp"

using namespace uavsim;

namespace {

LearningConfig cfg() { return LearningConfig{}; }

// Square service area centered at the origin.
Region square_area(double half_extent, double h) {
  const int n = static_cast<int>(std::round(2 * half_extent / h));
  Region r({-half_extent, -half_extent}, h, n, n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) r.set_cell(ix, iy);
  return r;
}

std::vector<TransmissionRecord> cluster_records(std::mt19937_64& rng, Vec2 center,
                                                double sigma, int ue_count,
                                                double rate_bps, double tau) {
  std::normal_distribution<double> gx(center.x, sigma), gy(center.y, sigma);
  std::uniform_real_distribution<double> when(1.0, tau);
  std::vector<TransmissionRecord> out;
  for (int i = 0; i < ue_count; ++i) {
    const Vec2 loc{gx(rng), gy(rng)};
    out.push_back({rate_bps, loc, when(rng)});
  }
  return out;
}

}  // namespace

TEST_CASE("build_density_samples weights") {
  auto c = cfg();

  SUBCASE("single record") {
    std::vector<TransmissionRecord> rs{{100.0, {3.0, 4.0}, 5.0}};
    auto s = build_density_samples(rs, c);
    REQUIRE(s.points.size() == 1);
    CHECK(s.weights[0] == doctest::Approx(100.0 / 120.0));
  }

  SUBCASE("same snapped location adds, different separates") {
    std::vector<TransmissionRecord> rs{{60.0, {3.0, 4.0}, 5.0},
                                       {60.0, {6.0, 4.0}, 6.0},
                                       {60.0, {26.0, 4.0}, 7.0}};
    auto s = build_density_samples(rs, c);
    REQUIRE(s.points.size() == 2);
    const size_t heavy = s.weights[0] > s.weights[1] ? 0 : 1;
    CHECK(s.weights[heavy] == doctest::Approx(2 * 60.0 / 120.0));
  }

  SUBCASE("constant rate across every slot telescopes to the rate") {
    std::vector<TransmissionRecord> rs;
    for (int k = 1; k <= 120; ++k) rs.push_back({250.0, {1.0, 1.0}, static_cast<double>(k)});
    auto s = build_density_samples(rs, c);
    REQUIRE(s.points.size() == 1);
    CHECK(s.weights[0] == doctest::Approx(250.0).epsilon(1e-12));
  }

  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(build_density_samples({}, c), Error);
  }
}

TEST_CASE("estimate_ue_distribution finds cluster structure") {
  std::mt19937_64 rng(2);
  auto rs = cluster_records(rng, {0, 0}, 8.0, 600, 1000.0, 120.0);
  MixtureModel one = estimate_ue_distribution(rs, 1, 5);
  CHECK(std::hypot(one.components[0].mean.x, one.components[0].mean.y) < 3.0);

  auto far = cluster_records(rng, {400, 0}, 8.0, 600, 1000.0, 120.0);
  rs.insert(rs.end(), far.begin(), far.end());
  MixtureModel two = estimate_ue_distribution(rs, 2, 5);
  MixtureModel two_again = estimate_ue_distribution(rs, 2, 5);
  for (size_t k = 0; k < 2; ++k) {
    CHECK(two.components[k].mean.x == two_again.components[k].mean.x);
    const double to_a = std::hypot(two.components[k].mean.x, two.components[k].mean.y);
    const double to_b = std::hypot(two.components[k].mean.x - 400, two.components[k].mean.y);
    CHECK(std::min(to_a, to_b) < 5.0);
  }
}

TEST_CASE("estimate_traffic_density: mass conservation and peak placement") {
  std::mt19937_64 rng(7);
  const double tau = 120.0;
  auto rs = cluster_records(rng, {-150, 0}, 25.0, 200, 800.0, tau);
  auto hot = cluster_records(rng, {180, 40}, 25.0, 200, 8000.0, tau);
  rs.insert(rs.end(), hot.begin(), hot.end());

  auto c = cfg();
  MixtureModel m = estimate_traffic_density(rs, 2, c);
  // Total integral equals the observed time-averaged rate within 1 percent.
  double observed = 0.0;
  for (const auto& r : rs) observed += r.rate_bps * c.slot_s / c.learn_window_s;
  CHECK(m.total_integral() == doctest::Approx(observed).epsilon(0.01));

  // The fitted peak sits near the hot cluster.
  double best = -1.0;
  Vec2 peak{0, 0};
  for (const auto& comp : m.components) {
    const double v = mixture_eval(m, comp.mean);
    if (v > best) {
      best = v;
      peak = comp.mean;
    }
  }
  CHECK(std::hypot(peak.x - 180, peak.y - 40) < 20.0);

  SUBCASE("all-zero rates carry no positive weight") {
    std::vector<TransmissionRecord> zeros{{0.0, {0, 0}, 5.0}, {0.0, {30, 0}, 6.0}};
    CHECK_THROWS_AS(estimate_traffic_density(zeros, 1, c), Error);
  }
}

TEST_CASE("detect_hotspot") {
  Region area = square_area(300, 10);

  SUBCASE("single bump yields a disc-like super-threshold set") {
    MixtureModel m;
    m.kind = MixtureKind::density_function;
    m.components = {{100.0, {20, -30}, Mat2::scaled(40.0 * 40.0)}};
    Region hs = detect_hotspot(m, area);
    CHECK(hs.count() > 0);
    // Every hotspot cell is strictly super-average.
    const double avg = region_integral(m, area) / area.area();
    hs.for_each_cell([&](int, int, Vec2 c) { CHECK(mixture_eval(m, c) > avg); });
    CHECK(hs.contains({20, -30}));
    // The threshold contour of a Gaussian is a circle; the set stays local.
    hs.for_each_cell([&](int, int, Vec2 c) {
      CHECK(std::hypot(c.x - 20, c.y + 30) < 150.0);
    });
  }

  SUBCASE("two equal bumps: only the peak's component is returned") {
    MixtureModel m;
    m.kind = MixtureKind::density_function;
    m.components = {{100.0, {-150, 0}, Mat2::scaled(900.0)},
                    {99.0, {150, 0}, Mat2::scaled(900.0)}};
    Region hs = detect_hotspot(m, area);
    CHECK(hs.contains({-150, 0}));
    CHECK_FALSE(hs.contains({150, 0}));
  }

  SUBCASE("a constant surface has no hotspot") {
    MixtureModel m;
    m.kind = MixtureKind::density_function;
    // Enormous covariance: essentially flat over the area.
    m.components = {{5.0, {0, 0}, Mat2::scaled(1e21)}};
    CHECK_THROWS_WITH_AS(detect_hotspot(m, area),
                         "no hotspot: nothing exceeds the area average", Error);
  }
}

TEST_CASE("predict_demand: closed form, linearity, monotonicity") {
  MixtureModel m;
  m.kind = MixtureKind::density_function;
  m.components = {{100.0, {0, 0}, Mat2::scaled(2500.0)}};
  Region wide = square_area(350, 5);
  CHECK(predict_demand(m, wide, 0.0) == 0.0);
  CHECK(predict_demand(m, wide, 1080.0) == doctest::Approx(1.696460e9).epsilon(1e-3));
  CHECK(predict_demand(m, wide, 2160.0) ==
        doctest::Approx(2 * predict_demand(m, wide, 1080.0)).epsilon(1e-12));

  Region inner = square_area(100, 5);
  CHECK(predict_demand(m, inner, 1080.0) <= predict_demand(m, wide, 1080.0));
}

TEST_CASE("split_hotspot") {
  LearningConfig c = cfg();
  SplitContext ctx;
  ctx.placement.altitude_min_m = 50.0;
  ctx.placement.altitude_max_m = 200.0;
  ctx.p_max_w = 20.0;

  // A compact flat-rate hotspot: capacity is nearly placement-invariant, so
  // the single-UAV bound is stable across subareas.
  Region hs = square_area(40, 5);
  MixtureModel m;
  m.kind = MixtureKind::density_function;
  m.components = {{1.0, {0, 0}, Mat2::scaled(1e10)}};  // flat over the hotspot

  // Single-UAV bound at max power for the full hotspot.
  CellField density = mixture_field(m, hs);
  double mass = 0.0;
  hs.for_each_cell([&](int ix, int iy, Vec2) { mass += density.at(ix, iy); });
  for (auto& v : density.values) v /= mass * hs.cell_area();
  auto place = optimal_service_point(hs, density, 1.0, c.service_interval_s,
                                     c.efficiency, ctx.channel, ctx.p_max_w,
                                     ctx.placement);
  const double bound = c.efficiency * c.service_interval_s *
                       hotspot_capacity(place.service_point, ctx.p_max_w, hs,
                                        density, ctx.channel);

  SUBCASE("demand below the bound keeps one subarea") {
    auto parts = split_hotspot(m, hs, 0.5 * bound, c, ctx);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].first.count() == hs.count());
    CHECK(parts[0].second == doctest::Approx(0.5 * bound).epsilon(1e-9));
  }

  SUBCASE("2.5x the bound needs three subareas with near-equal demand") {
    const double demand = 2.5 * bound;
    auto parts = split_hotspot(m, hs, demand, c, ctx);
    REQUIRE(parts.size() == 3);
    double sum = 0.0;
    size_t cells = 0;
    for (const auto& [sub, d] : parts) {
      CHECK(d == doctest::Approx(demand / 3).epsilon(0.01));
      sum += d;
      cells += sub.count();
    }
    CHECK(sum == doctest::Approx(demand).epsilon(1e-9));
    CHECK(cells == hs.count());
  }

  SUBCASE("unservable single cell reports an error") {
    Region single = square_area(40, 80);  // one 80 m cell
    CHECK_THROWS_WITH_AS(split_hotspot(m, single, 1e15, c, ctx), "demand unservable",
                         Error);
  }
}

TEST_CASE("avg_rate_per_ue") {
  MixtureModel m;
  m.kind = MixtureKind::density_function;
  m.components = {{100.0, {0, 0}, Mat2::scaled(2500.0)}};
  Region wide = square_area(350, 5);
  const double integral = region_integral(m, wide);
  CHECK(avg_rate_per_ue(m, wide, 100) == doctest::Approx(integral / 100));
  CHECK_THROWS_AS(avg_rate_per_ue(m, wide, 0), Error);

  MixtureModel doubled = m;
  doubled.components[0].weight *= 2.0;
  CHECK(avg_rate_per_ue(doubled, wide, 100) ==
        doctest::Approx(2 * integral / 100).epsilon(1e-12));

  // Per-UE rate over the hotspot dominates the whole-area one when UE counts
  // scale with the region masses but the hotspot is super-threshold.
  Region hs = detect_hotspot(m, wide);
  const double rho_full = avg_rate_per_ue(m, wide, 100);
  const double rho_hot = avg_rate_per_ue(m, hs, 50);
  CHECK(rho_hot >= rho_full);
}

TEST_CASE("mre") {
  CHECK(mre({5.0, 7.0}, {5.0, 7.0}).mre == 0.0);
  CHECK(mre({11.0}, {10.0}).mre == doctest::Approx(0.1));
  CHECK(mre({11.0, 13.0}, {10.0, 10.0}).mre == doctest::Approx(0.2));
  auto r = mre({1.0, 2.0}, {0.0, 1.0});
  CHECK(r.skipped == 1);
  CHECK(r.used == 1);
  CHECK(r.mre == doctest::Approx(1.0));
}

TEST_CASE("em baseline demand") {
  LearningConfig c = cfg();
  std::mt19937_64 rng(19);
  auto rs = cluster_records(rng, {0, 0}, 30.0, 400, 600.0, 120.0);
  MixtureModel ue = estimate_ue_distribution(rs, 1, 3);
  Region wide = square_area(400, 10);
  double total_rate = 0.0;
  for (const auto& r : rs) total_rate += r.rate_bps * c.slot_s / c.learn_window_s;

  // Hotspot covering everything: demand is T x total average rate.
  CHECK(em_demand_baseline(ue, rs, wide, 1080.0, c) ==
        doctest::Approx(1080.0 * total_rate).epsilon(0.01));

  // Uniform traffic: EM baseline and the WEM surface agree.
  MixtureModel density = estimate_traffic_density(rs, 1, c);
  Region hs = detect_hotspot(density, wide);
  const double em_d = em_demand_baseline(ue, rs, hs, 1080.0, c);
  const double wem_d = predict_demand(density, hs, 1080.0);
  CHECK(std::abs(em_d - wem_d) / wem_d < 0.1);

  // Known mass: half the UEs inside the hotspot.
  MixtureModel half;
  half.kind = MixtureKind::probabilistic;
  half.components = {{0.5, {0, 0}, Mat2::scaled(400.0)},
                     {0.5, {5000, 5000}, Mat2::scaled(400.0)}};
  Region near_origin = square_area(200, 5);
  const double d = em_demand_baseline(half, rs, near_origin, 1080.0, c);
  CHECK(d == doctest::Approx(1080.0 * total_rate * 0.5).epsilon(1e-2));
}

TEST_CASE("k-mean baseline demand") {
  LearningConfig c = cfg();

  SUBCASE("k = 1 takes the nearest sample; k = N averages everything") {
    WeightedSamples s;
    s.points = {{5, 5}, {95, 5}};
    s.weights = {10.0, 30.0};
    Region left({0, 0}, 10, 1, 1);
    left.set_cell(0, 0);
    const double scale = left.cell_area() / (c.grid_cell_m * c.grid_cell_m);
    CHECK(kmean_demand_baseline(s, 1, left, 100.0, c) ==
          doctest::Approx(100.0 * 10.0 * scale));
    CHECK(kmean_demand_baseline(s, 2, left, 100.0, c) ==
          doctest::Approx(100.0 * 20.0 * scale));
    CHECK_THROWS_AS(kmean_demand_baseline(s, 3, left, 100.0, c), Error);
  }

  SUBCASE("constant weights predict a constant surface") {
    WeightedSamples s;
    for (int i = 0; i < 25; ++i)
      s.points.push_back({10.0 * (i % 5) + 5.0, 10.0 * (i / 5) + 5.0});
    s.weights.assign(25, 4.0);
    Region q({0, 0}, 10, 5, 5);
    for (int iy = 0; iy < 5; ++iy)
      for (int ix = 0; ix < 5; ++ix) q.set_cell(ix, iy);
    // 25 cells x weight 4, grid-matched cells: demand = T * 100.
    CHECK(kmean_demand_baseline(s, 3, q, 7.0, c) == doctest::Approx(7.0 * 100.0));
  }
}
