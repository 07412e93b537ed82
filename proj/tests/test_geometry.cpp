#include "doctest.h"
#include "geometry.hpp"

using namespace uavsim;

TEST_CASE("Mat2 eigen floor keeps directions") {
  Mat2 m{100.0, 0.0, 1e-9};
  double lo, hi;
  m.eigenvalues(lo, hi);
  CHECK(lo == doctest::Approx(1e-9));
  Mat2 f = m.floored(1e-6);
  f.eigenvalues(lo, hi);
  CHECK(lo >= 1e-6 * (1 - 1e-9));
  CHECK(hi == doctest::Approx(100.0));
  const Mat2 singular{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(singular.inverse(), Error);
}

TEST_CASE("Region basics and area") {
  Region r({10, 20}, 5.0, 4, 3);
  CHECK(r.empty());
  r.set_cell(0, 0);
  r.set_cell(3, 2);
  CHECK(r.count() == 2);
  CHECK(r.area() == doctest::Approx(2 * 25.0));
  CHECK(r.contains({12.0, 22.0}));
  CHECK_FALSE(r.contains({17.0, 22.0}));
  const Vec2 c = r.cell_center(3, 2);
  CHECK(c.x == doctest::Approx(10 + 3.5 * 5));
  CHECK(c.y == doctest::Approx(20 + 2.5 * 5));
}

TEST_CASE("connected components use 4-adjacency") {
  Region r({0, 0}, 1.0, 5, 5);
  // Two blocks touching only diagonally.
  r.set_cell(0, 0);
  r.set_cell(1, 0);
  r.set_cell(1, 1);
  r.set_cell(2, 2);
  r.set_cell(3, 2);
  Region a = r.connected_component(0, 0);
  CHECK(a.count() == 3);
  CHECK_FALSE(a.cell(2, 2));
  Region b = r.connected_component(3, 2);
  CHECK(b.count() == 2);
  CHECK(Region::unite(a, b).count() == 5);
}
