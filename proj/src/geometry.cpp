#include "geometry.hpp"

#include <deque>

namespace uavsim {

Region Region::connected_component(int ix, int iy) const {
  Region out = like();
  if (!cell(ix, iy)) return out;
  std::vector<uint8_t> seen(static_cast<size_t>(nx_) * ny_, 0);
  std::deque<std::pair<int, int>> queue{{ix, iy}};
  seen[static_cast<size_t>(iy) * nx_ + ix] = 1;
  while (!queue.empty()) {
    auto [cx, cy] = queue.front();
    queue.pop_front();
    out.set_cell(cx, cy);
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int px = cx + dx[k], py = cy + dy[k];
      if (!cell(px, py)) continue;
      auto& s = seen[static_cast<size_t>(py) * nx_ + px];
      if (s) continue;
      s = 1;
      queue.emplace_back(px, py);
    }
  }
  return out;
}

Region Region::unite(const Region& a, const Region& b) {
  if (!a.same_grid(b)) throw invalid("region grids differ");
  Region out = a;
  b.for_each_cell([&](int ix, int iy, Vec2) { out.set_cell(ix, iy); });
  return out;
}

}  // namespace uavsim
