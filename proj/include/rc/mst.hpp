#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "rc/core.hpp"
#include "rc/io.hpp"
#include "rc/knn.hpp"
#include "rc/parallel.hpp"
#include "rc/reach.hpp"
#include "rc/union_find.hpp"

namespace rc {

inline constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

/// Minimum spanning forest: n - component_count edges, ascending (w, u, v).
struct SpanningForest {
  std::size_t n = 0;
  EdgeList edges;
  std::size_t component_count = 0;

  [[nodiscard]] double total_weight() const noexcept {
    double s = 0.0;
    for (const auto& e : edges) s += e.w;
    return s;
  }
};

inline bool edge_order(const WeightedEdge& a, const WeightedEdge& b) noexcept {
  if (a.w != b.w) return a.w < b.w;
  return (std::uint64_t{a.u} << 32 | a.v) < (std::uint64_t{b.u} << 32 | b.v);
}

/// Sorts by the (w, u, v) key. Deterministic for any thread count.
///
/// Weights are never negative, so the top 16 bits of their IEEE pattern are
/// an order-preserving bucket key: one scatter pass, then the buckets are
/// sorted independently in parallel.
inline void sort_edges(EdgeList& edges) {
  constexpr std::size_t kBuckets = std::size_t{1} << 16;
  if (edges.size() < kBuckets) {
    parallel_sort(edges.begin(), edges.end(), edge_order);
    return;
  }
  auto bucket = [](const WeightedEdge& e) {
    return static_cast<std::size_t>(std::bit_cast<std::uint64_t>(e.w + 0.0) >> 48);
  };
  std::vector<std::size_t> start(kBuckets + 1, 0);
  for (const auto& e : edges) {
    if (!(e.w >= 0.0)) throw ContractError("edge weights must be non-negative");
    ++start[bucket(e) + 1];
  }
  for (std::size_t b = 0; b < kBuckets; ++b) start[b + 1] += start[b];
  EdgeList out(edges.size());
  auto pos = start;
  for (const auto& e : edges) out[pos[bucket(e)]++] = e;

  std::vector<std::size_t> busy;
  for (std::size_t b = 0; b < kBuckets; ++b) {
    if (start[b + 1] - start[b] > 1) busy.push_back(b);
  }
  const std::size_t big = edges.size() / 4;
  parallel_for(0, busy.size(), [&](std::size_t i) {
    const auto b = busy[i];
    if (start[b + 1] - start[b] > big) return;
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(start[b]),
              out.begin() + static_cast<std::ptrdiff_t>(start[b + 1]), edge_order);
  }, 1);
  // a skewed bucket still gets the whole pool
  for (auto b : busy) {
    if (start[b + 1] - start[b] <= big) continue;
    parallel_sort(out.begin() + static_cast<std::ptrdiff_t>(start[b]),
                  out.begin() + static_cast<std::ptrdiff_t>(start[b + 1]), edge_order);
  }
  edges.swap(out);
}

inline SpanningForest kruskal_forest(EdgeList edges, std::size_t n) {
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw ContractError("edge endpoint out of range");
  }
  sort_edges(edges);
  SpanningForest forest;
  forest.n = n;
  forest.edges.reserve(n > 0 ? n - 1 : 0);
  UnionFind uf(n);
  for (const auto& e : edges) {
    if (forest.edges.size() + 1 >= n) break;
    if (uf.unite(e.u, e.v)) forest.edges.push_back(e);
  }
  forest.component_count = uf.component_count();
  return forest;
}

/// Exact MST of the complete mutual-reachability graph in O(n^2) time, O(n) memory.
inline SpanningForest prim_dense(const PointSet& points, const CoreDistances& core) {
  const std::size_t n = points.size();
  if (core.values.size() != n) throw ContractError("core distances not aligned with points");
  SpanningForest forest;
  forest.n = n;
  forest.component_count = 1;
  std::vector<double> best(n, kInfiniteWeight);
  std::vector<PointId> from(n, 0);
  std::vector<bool> in_tree(n, false);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    const auto cur = points.row(current);
    parallel_for(0, n, [&](std::size_t j) {
      if (in_tree[j]) return;
      const double w = mutual_reachability(core.values[current], core.values[j],
                                           std::sqrt(squared_distance(cur, points.row(j))));
      if (w < best[j]) {
        best[j] = w;
        from[j] = static_cast<PointId>(current);
      }
    }, 1024);
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_tree[j] && (next == n || best[j] < best[next])) next = j;
    }
    in_tree[next] = true;
    const auto a = from[next];
    const auto b = static_cast<PointId>(next);
    forest.edges.push_back({std::min(a, b), std::max(a, b), best[next]});
    current = next;
  }
  sort_edges(forest.edges);
  return forest;
}

/// Joins a spanning forest into a single tree.
///
/// Each extra component's lowest-index vertex is linked to vertex 0's
/// component by an infinite-weight edge, so the result always has n - 1
/// edges and stays sorted by (w, u, v).
inline EdgeList attach_forest_root(const SpanningForest& forest) {
  EdgeList out = forest.edges;
  if (forest.component_count <= 1) return out;
  UnionFind uf(forest.n);
  for (const auto& e : forest.edges) uf.unite(e.u, e.v);
  const auto root0 = uf.find(0);
  std::vector<bool> seen(forest.n, false);
  seen[root0] = true;
  for (std::size_t i = 1; i < forest.n; ++i) {
    const auto r = uf.find(static_cast<std::uint32_t>(i));
    if (seen[r]) continue;
    seen[r] = true;
    out.push_back({0, static_cast<PointId>(i), kInfiniteWeight});
  }
  return out;
}

/// Debug dump as "u,v,w" rows.
inline void write_edges_csv(const std::filesystem::path& path, const EdgeList& edges) {
  auto out = detail::open_out(path);
  out << "u,v,w\n";
  for (const auto& e : edges) {
    out << e.u << ',' << e.v << ',' << (std::isinf(e.w) ? std::string("inf") : detail::format_double(e.w))
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rc
