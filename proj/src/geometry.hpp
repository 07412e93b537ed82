#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavsim {

/// Error carrying a machine-readable kind, thrown by every module on
/// contract violations. The C API maps kinds to status codes.
struct Error : std::runtime_error {
  enum class Kind { invalid_argument, io, parse, runtime, internal };
  Kind kind;
  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

inline Error invalid(const std::string& msg) {
  return Error(Error::Kind::invalid_argument, msg);
}

/// Position in the local planar frame: x east, y north, z altitude (meters).
struct SpatialPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const SpatialPoint& a, const SpatialPoint& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double distance_xy(const SpatialPoint& a, const SpatialPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]]; covariances live here.
struct Mat2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  static Mat2 identity() { return {1.0, 0.0, 1.0}; }
  static Mat2 scaled(double s) { return {s, 0.0, s}; }

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }

  Mat2 inverse() const {
    const double d = det();
    if (d <= 0.0) throw invalid("singular covariance");
    return {yy / d, -xy / d, xx / d};
  }

  // Eigenvalues of a symmetric 2x2, ascending. The small one comes from
  // det/hi, which avoids the cancellation in mean - r.
  void eigenvalues(double& lo, double& hi) const {
    const double mean = 0.5 * trace();
    const double diff = 0.5 * (xx - yy);
    const double r = std::sqrt(diff * diff + xy * xy);
    hi = mean + r;
    const double d = det();
    lo = (hi > 0.0 && d > 0.0) ? d / hi : mean - r;
  }

  // Clamp eigenvalues from below; keeps eigenvectors.
  Mat2 floored(double floor_value) const {
    double lo, hi;
    eigenvalues(lo, hi);
    if (lo >= floor_value) return *this;
    // Eigenvector for hi: (xy, hi - xx) unless degenerate.
    double vx = xy, vy = hi - xx;
    double n = std::hypot(vx, vy);
    if (n < 1e-300) { vx = 1.0; vy = 0.0; n = 1.0; }
    vx /= n; vy /= n;
    const double l1 = std::max(hi, floor_value);
    const double l2 = floor_value;
    // A = l1 v v^T + l2 (I - v v^T)
    return {l2 + (l1 - l2) * vx * vx, (l1 - l2) * vx * vy, l2 + (l1 - l2) * vy * vy};
  }

  double quad(const Vec2& v) const {  // v^T A v
    return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y;
  }
};

/// Axis-aligned grid-cell region: origin is the lower-left corner of cell
/// (0,0), cells are cell_size x cell_size, mask marks included cells
/// (row-major, index = iy * nx + ix).
class Region {
 public:
  Region() = default;
  Region(Vec2 origin, double cell_size, int nx, int ny)
      : origin_(origin), cell_(cell_size), nx_(nx), ny_(ny),
        mask_(static_cast<size_t>(nx) * ny, 0) {
    if (cell_size <= 0.0 || nx <= 0 || ny <= 0) throw invalid("bad region grid");
  }

  Vec2 origin() const { return origin_; }
  double cell_size() const { return cell_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  bool in_grid(int ix, int iy) const {
    return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_;
  }
  bool cell(int ix, int iy) const {
    return in_grid(ix, iy) && mask_[static_cast<size_t>(iy) * nx_ + ix] != 0;
  }
  void set_cell(int ix, int iy, bool on = true) {
    if (!in_grid(ix, iy)) throw invalid("cell outside grid");
    mask_[static_cast<size_t>(iy) * nx_ + ix] = on ? 1 : 0;
  }

  Vec2 cell_center(int ix, int iy) const {
    return {origin_.x + (ix + 0.5) * cell_, origin_.y + (iy + 0.5) * cell_};
  }

  // Grid indices of the cell containing p (may be outside the grid).
  void locate(const Vec2& p, int& ix, int& iy) const {
    ix = static_cast<int>(std::floor((p.x - origin_.x) / cell_));
    iy = static_cast<int>(std::floor((p.y - origin_.y) / cell_));
  }

  bool contains(const Vec2& p) const {
    int ix, iy;
    locate(p, ix, iy);
    return cell(ix, iy);
  }

  size_t count() const {
    size_t n = 0;
    for (auto m : mask_) n += m != 0;
    return n;
  }
  bool empty() const { return count() == 0; }
  double cell_area() const { return cell_ * cell_; }
  double area() const { return cell_area() * static_cast<double>(count()); }

  template <typename F>
  void for_each_cell(F&& f) const {  // f(ix, iy, center)
    for (int iy = 0; iy < ny_; ++iy)
      for (int ix = 0; ix < nx_; ++ix)
        if (mask_[static_cast<size_t>(iy) * nx_ + ix])
          f(ix, iy, cell_center(ix, iy));
  }

  // Same grid, empty mask.
  Region like() const {
    Region r(origin_, cell_, nx_, ny_);
    return r;
  }

  /// 4-adjacent connected component of this region containing (ix, iy).
  Region connected_component(int ix, int iy) const;

  /// Cells present in either region; grids must match.
  static Region unite(const Region& a, const Region& b);

  bool same_grid(const Region& o) const {
    return origin_.x == o.origin_.x && origin_.y == o.origin_.y &&
           cell_ == o.cell_ && nx_ == o.nx_ && ny_ == o.ny_;
  }

 private:
  Vec2 origin_{0.0, 0.0};
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<uint8_t> mask_;
};

/// Per-cell scalar field over a region's grid (dense row-major storage).
struct CellField {
  Region region;
  std::vector<double> values;  // nx * ny, meaningful on mask cells

  double at(int ix, int iy) const {
    return values[static_cast<size_t>(iy) * region.nx() + ix];
  }
  double& at(int ix, int iy) {
    return values[static_cast<size_t>(iy) * region.nx() + ix];
  }

  /// Integral over the region (midpoint rule).
  double integral() const {
    double s = 0.0;
    region.for_each_cell([&](int ix, int iy, Vec2) { s += at(ix, iy); });
    return s * region.cell_area();
  }

  /// Scale so the field integrates to 1 over the region.
  void normalize() {
    const double s = integral();
    if (s <= 0.0) throw invalid("cannot normalize empty field");
    for (auto& v : values) v /= s;
  }
};

}  // namespace uavsim
