#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "rc/core.hpp"
#include "rc/parallel.hpp"
#include "rc/random.hpp"

namespace rc {

/// Squared Euclidean distance accumulated in double.
///
/// Four fixed lanes combined as (s0 + s1) + (s2 + s3). The result is exactly
/// symmetric in its arguments, and every caller in the library goes through
/// this one kernel so equal inputs always produce bitwise-equal distances.
inline double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = double(a[i]) - double(b[i]);
    const double d1 = double(a[i + 1]) - double(b[i + 1]);
    const double d2 = double(a[i + 2]) - double(b[i + 2]);
    const double d3 = double(a[i + 3]) - double(b[i + 3]);
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = double(a[i]) - double(b[i]);
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

inline double squared_distance(std::span<const float> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - b[i];
    s += d * d;
  }
  return s;
}

/// Per-point k nearest neighbours, rows ascending by (distance, index).
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<PointId> neighbor_ids;  // n x k
  std::vector<double> neighbor_dists;  // n x k, Euclidean

  [[nodiscard]] std::span<const PointId> ids(std::size_t i) const noexcept {
    return {neighbor_ids.data() + i * k, k};
  }
  [[nodiscard]] std::span<const double> dists(std::size_t i) const noexcept {
    return {neighbor_dists.data() + i * k, k};
  }

  friend bool operator==(const KnnGraph&, const KnnGraph&) = default;
};

namespace detail {

/// Bounded max-heap keeping the k smallest (squared distance, index) pairs.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  void clear() { heap_.clear(); }

  [[nodiscard]] bool full() const noexcept { return heap_.size() == k_; }

  void push(double d2, PointId id) {
    const Entry e{d2, id};
    if (heap_.size() < k_) {
      heap_.push_back(e);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (e < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = e;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  /// Writes the retained entries ascending; distances are square-rooted.
  void drain(std::span<PointId> ids, std::span<double> dists) {
    std::sort_heap(heap_.begin(), heap_.end());
    for (std::size_t j = 0; j < heap_.size(); ++j) {
      ids[j] = heap_[j].id;
      dists[j] = std::sqrt(heap_[j].d2);
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return heap_.size(); }

 private:
  struct Entry {
    double d2;
    PointId id;
    friend bool operator<(const Entry& a, const Entry& b) noexcept {
      return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id);
    }
  };
  std::size_t k_;
  std::vector<Entry> heap_;
};

inline void check_k(std::size_t n, std::size_t k) {
  if (k < 1 || k + 1 > n) {
    throw ContractError("k must satisfy 1 <= k <= n-1 (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");
  }
}

}  // namespace detail

/// Exact k nearest neighbours of every point among the other points.
inline KnnGraph brute_force_knn(const PointSet& points, std::size_t k) {
  const std::size_t n = points.size();
  detail::check_k(n, k);
  KnnGraph g{n, k, std::vector<PointId>(n * k), std::vector<double>(n * k)};
  parallel_for(0, n, [&](std::size_t i) {
    detail::TopK top(k);
    const auto qi = points.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      top.push(squared_distance(qi, points.row(j)), static_cast<PointId>(j));
    }
    top.drain({g.neighbor_ids.data() + i * k, k}, {g.neighbor_dists.data() + i * k, k});
  }, 16);
  return g;
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansResult {
  std::size_t ncentroids = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // ncentroids x dim
  std::vector<std::uint32_t> assignments;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // one entry per assignment pass
  std::size_t iterations = 0;

  [[nodiscard]] std::span<const double> centroid(std::size_t c) const noexcept {
    return {centroids.data() + c * dim, dim};
  }

  friend bool operator==(const KMeansResult&, const KMeansResult&) = default;
};

namespace detail {

struct NearestCentroid {
  std::uint32_t index;
  double d2;
};

inline NearestCentroid nearest_centroid(std::span<const float> p, std::span<const double> cents,
                                        std::size_t nc, std::size_t dim) {
  NearestCentroid best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < nc; ++c) {
    const double d2 = squared_distance(p, cents.subspan(c * dim, dim));
    if (d2 < best.d2) best = {static_cast<std::uint32_t>(c), d2};
  }
  return best;
}

/// k-means++ seeding by D^2 sampling.
inline std::vector<double> kmeanspp_seed(const PointSet& points, std::size_t nc, Rng& rng) {
  const std::size_t n = points.size();
  const std::size_t dim = points.dim();
  std::vector<double> cents;
  cents.reserve(nc * dim);
  auto add_center = [&](std::size_t i) {
    for (float v : points.row(i)) cents.push_back(v);
  };
  add_center(static_cast<std::size_t>(rng.below(n)));
  std::vector<double> d2(n);
  parallel_for(0, n, [&](std::size_t i) {
    d2[i] = squared_distance(points.row(i), std::span<const double>(cents.data(), dim));
  }, 256);
  for (std::size_t c = 1; c < nc; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        // rounding left target past the last positive weight
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    add_center(pick);
    const std::span<const double> newest(cents.data() + c * dim, dim);
    parallel_for(0, n, [&](std::size_t i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), newest));
    }, 256);
  }
  return cents;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding.
///
/// Stops after `max_iter` assignment passes or when assignments stop
/// changing. A cell left empty by an update is re-seeded at the point
/// farthest from its assigned centroid.
inline KMeansResult kmeans_fit(const PointSet& points, std::size_t ncentroids,
                               std::size_t max_iter, std::uint64_t seed) {
  const std::size_t n = points.size();
  const std::size_t dim = points.dim();
  if (ncentroids < 1 || ncentroids > n) {
    throw ContractError("ncentroids must be in [1, n]");
  }
  if (max_iter < 1) throw ContractError("max_iter must be >= 1");

  Rng rng(seed);
  KMeansResult res;
  res.ncentroids = ncentroids;
  res.dim = dim;
  res.centroids = detail::kmeanspp_seed(points, ncentroids, rng);
  res.assignments.assign(n, 0);

  std::vector<double> point_d2(n);
  std::vector<std::uint32_t> next(n);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    parallel_for(0, n, [&](std::size_t i) {
      const auto nc = detail::nearest_centroid(points.row(i), res.centroids, ncentroids, dim);
      next[i] = nc.index;
      point_d2[i] = nc.d2;
    }, 256);
    double inertia = 0.0;
    for (double v : point_d2) inertia += v;
    const bool changed = iter == 0 || next != res.assignments;
    res.assignments.swap(next);
    res.inertia = inertia;
    res.inertia_history.push_back(inertia);
    res.iterations = iter + 1;
    if (!changed || iter + 1 == max_iter) break;

    // update step, summed in point order
    std::vector<double> sums(ncentroids * dim, 0.0);
    std::vector<std::size_t> counts(ncentroids, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = res.assignments[i];
      ++counts[c];
      const auto r = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += r[j];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < ncentroids; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) {
          res.centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
        }
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (far == n || point_d2[i] > point_d2[far]) far = i;
      }
      taken[far] = true;
      point_d2[far] = 0.0;
      const auto r = points.row(far);
      for (std::size_t j = 0; j < dim; ++j) res.centroids[c * dim + j] = r[j];
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Inverted-file index

struct IvfIndex {
  std::size_t nlist = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;                  // nlist x dim
  std::vector<std::vector<PointId>> postings;     // per cell, ascending point ids
  std::vector<std::uint32_t> cell_of;             // per point

  [[nodiscard]] std::span<const double> centroid(std::size_t c) const noexcept {
    return {centroids.data() + c * dim, dim};
  }
};

struct IvfBuildOptions {
  std::size_t max_iter = 25;
  /// Training sample size is capped at this many points per cell.
  std::size_t train_points_per_list = 64;
};

inline std::size_t default_nlist(std::size_t n) {
  const auto v = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return std::clamp<std::size_t>(v, 1, std::max<std::size_t>(1, n));
}

inline std::size_t default_nprobe(std::size_t nlist) { return std::max<std::size_t>(1, nlist / 16); }

inline IvfIndex ivf_build(const PointSet& points, std::size_t nlist, std::uint64_t seed,
                          IvfBuildOptions opts = {}) {
  const std::size_t n = points.size();
  if (nlist < 1 || nlist > n) throw ContractError("nlist must be in [1, n]");

  const std::size_t cap = std::max(nlist, opts.train_points_per_list * nlist);
  KMeansResult km;
  if (n > cap) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // partial Fisher-Yates for a uniform sample without replacement
    for (std::size_t i = 0; i < cap; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    km = kmeans_fit(points.subset(idx), nlist, opts.max_iter, seed);
  } else {
    km = kmeans_fit(points, nlist, opts.max_iter, seed);
  }

  IvfIndex index;
  index.nlist = nlist;
  index.dim = points.dim();
  index.centroids = std::move(km.centroids);
  index.cell_of.resize(n);
  parallel_for(0, n, [&](std::size_t i) {
    index.cell_of[i] =
        detail::nearest_centroid(points.row(i), index.centroids, nlist, index.dim).index;
  }, 256);
  index.postings.assign(nlist, {});
  for (std::size_t i = 0; i < n; ++i) {
    index.postings[index.cell_of[i]].push_back(static_cast<PointId>(i));
  }
  return index;
}

/// kNN of every indexed point, scanning only the `nprobe` nearest cells.
///
/// When those cells hold fewer than k other points, further cells are
/// scanned in centroid-distance order until k candidates exist.
inline KnnGraph ivf_search(const IvfIndex& index, const PointSet& points, std::size_t k,
                           std::size_t nprobe) {
  const std::size_t n = points.size();
  detail::check_k(n, k);
  if (nprobe < 1 || nprobe > index.nlist) throw ContractError("nprobe must be in [1, nlist]");
  if (index.cell_of.size() != n || index.dim != points.dim()) {
    throw ContractError("index was not built over these points");
  }
  KnnGraph g{n, k, std::vector<PointId>(n * k), std::vector<double>(n * k)};
  parallel_for(0, n, [&](std::size_t i) {
    const auto q = points.row(i);
    std::vector<std::pair<double, std::uint32_t>> order(index.nlist);
    for (std::size_t c = 0; c < index.nlist; ++c) {
      order[c] = {squared_distance(q, index.centroid(c)), static_cast<std::uint32_t>(c)};
    }
    std::sort(order.begin(), order.end());
    detail::TopK top(k);
    std::size_t candidates = 0;
    for (std::size_t probe = 0; probe < index.nlist; ++probe) {
      if (probe >= nprobe && candidates >= k) break;
      for (PointId j : index.postings[order[probe].second]) {
        if (j == i) continue;
        ++candidates;
        top.push(squared_distance(q, points.row(j)), j);
      }
    }
    top.drain({g.neighbor_ids.data() + i * k, k}, {g.neighbor_dists.data() + i * k, k});
  }, 16);
  return g;
}

}  // namespace rc
