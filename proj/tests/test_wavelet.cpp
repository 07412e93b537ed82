#include <cmath>
#include <random>

#include "doctest.h"
#include "wavelet.hpp"

using namespace uavsim;

namespace {

std::vector<double> daily_series(int hours, double amplitude, double noise_sigma,
                                 uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  std::vector<double> s(hours);
  for (int t = 0; t < hours; ++t)
    s[t] = 10.0 + amplitude * std::sin(2 * M_PI * t / 24.0) + noise(rng);
  return s;
}

}  // namespace

TEST_CASE("haar round trip is exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (size_t n : {4u, 7u, 168u, 501u}) {
    std::vector<double> s(n);
    for (auto& v : s) v = u(rng);
    auto dec = haar_forward(s, 2);
    auto back = haar_inverse(dec);
    REQUIRE(back.size() == s.size());
    for (size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(s[i]).epsilon(1e-12));
  }
}

TEST_CASE("haar details of hand-checkable inputs") {
  // A single step at an even position gives one level-1 detail of h/sqrt(2).
  std::vector<double> s{1, 1, 1, 1, 4, 1, 1, 1};
  auto dec = haar_forward(s, 2);
  CHECK(dec.detail(0)[0] == doctest::Approx(0.0));
  CHECK(dec.detail(0)[2] == doctest::Approx(3.0 / std::sqrt(2.0)));
  // Constant series decomposes to zero details everywhere.
  std::vector<double> c(16, 2.5);
  auto dc = haar_forward(c, 2);
  for (int l = 0; l < 2; ++l)
    for (double d : dc.detail(l)) CHECK(d == doctest::Approx(0.0));
}

TEST_CASE("congestion detection flags the spike hour and nothing else") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    auto s = daily_series(168, 2.0, 0.02, seed);
    const size_t spike = 83;
    s[spike] += 10.0;  // five times the seasonal amplitude
    auto flags = dwt_congestion_detect(s, 2, 3.0);
    CHECK(flags.count(spike) == 1);
    for (size_t t : flags) CHECK(t == spike);
  }
}

TEST_CASE("no flags on constant input or infinite threshold") {
  std::vector<double> c(64, 7.0);
  CHECK(dwt_congestion_detect(c, 2, 3.0).empty());
  auto s = daily_series(168, 2.0, 0.05, 9);
  s[50] += 10.0;
  CHECK(dwt_congestion_detect(s, 2, 1e18).empty());
}

TEST_CASE("short series is rejected") {
  std::vector<double> s{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(dwt_congestion_detect(s, 2, 3.0), Error);
}
