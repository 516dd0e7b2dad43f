#pragma once

// Dense reference HDBSCAN used as a test oracle: full n x n distance and
// mutual-reachability matrices, plain O(n^2) Prim. Shares only the
// hierarchy stages (single linkage, condensation, extraction) with rc.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rc/core.hpp"
#include "rc/hierarchy.hpp"
#include "rc/reach.hpp"

namespace oracle {

inline std::vector<double> distance_matrix(const rc::PointSet& p) {
  const std::size_t n = p.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < p.dim(); ++c) {
        const double diff = static_cast<double>(p.at(i, c)) - static_cast<double>(p.at(j, c));
        s += diff * diff;
      }
      d[i * n + j] = d[j * n + i] = std::sqrt(s);
    }
  }
  return d;
}

// distance to the min_samples-th nearest other point
inline std::vector<double> core_distances(const std::vector<double>& d, std::size_t n,
                                          std::size_t min_samples) {
  std::vector<double> core(n, 0.0);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(d[i * n + j]);
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), row.end());
    core[i] = row[min_samples - 1];
  }
  return core;
}

inline std::vector<double> mutual_reachability_matrix(const std::vector<double>& d,
                                                      const std::vector<double>& core,
                                                      std::size_t n) {
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) m[i * n + j] = std::max({core[i], core[j], d[i * n + j]});
    }
  }
  return m;
}

// classic Prim on a dense matrix; returns edges sorted for single linkage
inline rc::EdgeList prim(const std::vector<double>& m, std::size_t n) {
  rc::EdgeList out;
  if (n < 2) return out;
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t cur = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      if (m[cur * n + j] < best[j]) {
        best[j] = m[cur * n + j];
        from[j] = cur;
      }
      if (next == n || best[j] < best[next]) next = j;
    }
    in_tree[next] = true;
    const auto a = static_cast<rc::PointId>(std::min(from[next], next));
    const auto b = static_cast<rc::PointId>(std::max(from[next], next));
    out.push_back({a, b, best[next]});
    cur = next;
  }
  std::sort(out.begin(), out.end(), [](const rc::WeightedEdge& x, const rc::WeightedEdge& y) {
    if (x.w != y.w) return x.w < y.w;
    if (x.u != y.u) return x.u < y.u;
    return x.v < y.v;
  });
  return out;
}

inline double total_weight(const rc::EdgeList& e) {
  double s = 0.0;
  for (const auto& x : e) s += x.w;
  return s;
}

inline rc::ClusterAssignment hdbscan(const rc::PointSet& points, std::size_t min_cluster_size,
                                     std::size_t min_samples, bool allow_single_cluster = false) {
  const std::size_t n = points.size();
  const auto d = distance_matrix(points);
  const auto core = core_distances(d, n, min_samples);
  const auto m = mutual_reachability_matrix(d, core, n);
  const auto mst = prim(m, n);
  const auto slt = rc::single_linkage(mst, n);
  return rc::extract_clusters(rc::condense_tree(slt, min_cluster_size), allow_single_cluster);
}

}  // namespace oracle
