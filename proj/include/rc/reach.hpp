#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "rc/core.hpp"
#include "rc/knn.hpp"
#include "rc/parallel.hpp"

namespace rc {

/// Undirected weighted edge, stored with u < v.
struct WeightedEdge {
  PointId u = 0;
  PointId v = 0;
  double w = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

using EdgeList = std::vector<WeightedEdge>;

/// Distance from each point to its min_samples-th nearest other point.
struct CoreDistances {
  std::vector<double> values;
};

inline CoreDistances core_distances(const KnnGraph& knn, std::size_t min_samples) {
  if (min_samples < 1 || min_samples > knn.k) {
    throw ContractError("min_samples must be in [1, k]");
  }
  CoreDistances core{std::vector<double>(knn.n)};
  for (std::size_t i = 0; i < knn.n; ++i) core.values[i] = knn.dists(i)[min_samples - 1];
  return core;
}

/// Mutual reachability weight max(core[u], core[v], d(u, v)).
inline double mutual_reachability(double core_u, double core_v, double d) noexcept {
  return std::max({core_u, core_v, d});
}

/// Symmetrized mutual-reachability edges over the kNN graph, sorted by (u, v).
inline EdgeList mutual_reach_edges(const KnnGraph& knn, const CoreDistances& core) {
  if (core.values.size() != knn.n) throw ContractError("core distances not aligned with kNN graph");
  EdgeList edges(knn.n * knn.k);
  parallel_for(0, knn.n, [&](std::size_t i) {
    const auto ids = knn.ids(i);
    const auto ds = knn.dists(i);
    for (std::size_t j = 0; j < knn.k; ++j) {
      const auto a = static_cast<PointId>(i);
      const auto b = ids[j];
      edges[i * knn.k + j] = {std::min(a, b), std::max(a, b),
                              mutual_reachability(core.values[a], core.values[b], ds[j])};
    }
  }, 256);
  parallel_sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    return x.u < y.u || (x.u == y.u && x.v < y.v);
  });
  // both directions of a pair carry the same weight, so keeping either is exact
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const WeightedEdge& x, const WeightedEdge& y) {
                            return x.u == y.u && x.v == y.v;
                          }),
              edges.end());
  return edges;
}

}  // namespace rc
