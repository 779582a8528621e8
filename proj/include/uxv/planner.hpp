#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <queue>
#include <span>
#include <vector>

#include "uxv/geometry.hpp"

namespace uxv {

// Produces the horizontal waypoints (excluding `from`, ending with `to`) a
// vehicle follows to reach its target.
class PathPlanner {
 public:
  virtual ~PathPlanner() = default;
  virtual std::vector<Vec2> plan(Vec2 from, Vec2 to, std::span<const Polygon> obstacles) const = 0;
};

class StraightLinePlanner final : public PathPlanner {
 public:
  std::vector<Vec2> plan(Vec2, Vec2 to, std::span<const Polygon>) const override { return {to}; }
};

// Shortest visibility path around the obstacles' convex hulls, each hull
// pushed outward by `margin`. Falls back to the straight segment when it is
// already clear, when an endpoint lies inside an obstacle, or when no detour
// exists.
class HullDetourPlanner final : public PathPlanner {
 public:
  explicit HullDetourPlanner(double margin) : margin_(margin) {}

  std::vector<Vec2> plan(Vec2 from, Vec2 to, std::span<const Polygon> obstacles) const override {
    auto clear = [&](Vec2 a, Vec2 b) {
      for (const auto& poly : obstacles)
        if (segment_hits_polygon(a, b, poly)) return false;
      return true;
    };
    if (clear(from, to)) return {to};
    for (const auto& poly : obstacles)
      if (point_in_polygon(from, poly) || point_in_polygon(to, poly)) return {to};

    std::vector<Vec2> nodes{from, to};
    for (const auto& poly : obstacles) {
      for (const auto& v : offset_convex(convex_hull(poly), margin_)) {
        bool free = true;
        for (const auto& other : obstacles) free = free && !point_in_polygon(v, other);
        if (free) nodes.push_back(v);
      }
    }

    const std::size_t n = nodes.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<std::size_t> parent(n, n);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[0] = 0;
    queue.emplace(0.0, 0);
    while (!queue.empty()) {
      auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      if (u == 1) break;
      for (std::size_t v = 1; v < n; ++v) {
        if (v == u) continue;
        const double nd = d + distance(nodes[u], nodes[v]);
        if (nd >= dist[v] || !clear(nodes[u], nodes[v])) continue;
        dist[v] = nd;
        parent[v] = u;
        queue.emplace(nd, v);
      }
    }
    if (parent[1] == n) return {to};

    std::vector<Vec2> route;
    for (std::size_t v = 1; v != 0; v = parent[v]) route.push_back(nodes[v]);
    std::reverse(route.begin(), route.end());
    return route;
  }

  double margin() const { return margin_; }

 private:
  double margin_;
};

}  // namespace uxv
