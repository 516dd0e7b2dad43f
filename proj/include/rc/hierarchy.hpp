#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <json.hpp>

#include "rc/core.hpp"
#include "rc/reach.hpp"
#include "rc/union_find.hpp"

namespace rc {

/// Upper cap on lambda; zero distances map here instead of +inf.
inline constexpr double kLambdaMax = 1e100;

/// Density scale: 1/d, capped, with lambda(+inf) = 0.
inline double lambda_of(double distance) noexcept {
  if (std::isinf(distance)) return 0.0;
  if (distance <= 0.0) return kLambdaMax;
  return std::min(1.0 / distance, kLambdaMax);
}

/// Dendrogram from merging components in ascending edge order.
///
/// Node ids 0..n-1 are points; merge i creates node n + i.
struct SingleLinkageTree {
  struct Merge {
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double distance = 0.0;
    std::uint32_t size = 0;

    friend bool operator==(const Merge&, const Merge&) = default;
  };

  std::size_t n = 0;
  std::vector<Merge> merges;

  [[nodiscard]] std::uint32_t node_size(std::uint32_t node) const noexcept {
    return node < n ? 1u : merges[node - n].size;
  }
};

/// Builds the single-linkage tree from a spanning tree sorted by weight.
inline SingleLinkageTree single_linkage(const EdgeList& sorted_edges, std::size_t n) {
  if (n == 0) throw ContractError("single_linkage needs at least one point");
  if (sorted_edges.size() != n - 1) {
    throw ContractError("edge set is not a spanning tree: expected " + std::to_string(n - 1) +
                        " edges, got " + std::to_string(sorted_edges.size()));
  }
  SingleLinkageTree slt;
  slt.n = n;
  slt.merges.reserve(n - 1);
  UnionFind uf(n);
  std::vector<std::uint32_t> node_of(n);
  for (std::size_t i = 0; i < n; ++i) node_of[i] = static_cast<std::uint32_t>(i);
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& e : sorted_edges) {
    if (e.u >= n || e.v >= n) throw ContractError("edge endpoint out of range");
    if (e.w < prev) throw ContractError("edges are not sorted by ascending weight");
    prev = e.w;
    const auto ru = uf.find(e.u);
    const auto rv = uf.find(e.v);
    if (ru == rv) throw ContractError("edge set is not a spanning tree: contains a cycle");
    const auto left = node_of[ru];
    const auto right = node_of[rv];
    const auto size = slt.node_size(left) + slt.node_size(right);
    uf.unite(ru, rv);
    node_of[uf.find(ru)] = static_cast<std::uint32_t>(n + slt.merges.size());
    slt.merges.push_back({left, right, e.w, size});
  }
  return slt;
}

/// Cluster hierarchy after dropping splits smaller than min_cluster_size.
///
/// Cluster 0 is the root. Child ids are always greater than their parent's.
/// Every point appears in exactly one fallout record: the cluster it leaves
/// and the lambda at which it leaves.
struct CondensedTree {
  struct Cluster {
    std::uint32_t id = 0;
    std::int64_t parent = -1;
    double lambda_birth = 0.0;
    std::uint32_t size = 0;

    friend bool operator==(const Cluster&, const Cluster&) = default;
  };
  struct Fallout {
    std::uint32_t cluster = 0;
    PointId point = 0;
    double lambda = 0.0;

    friend bool operator==(const Fallout&, const Fallout&) = default;
  };

  std::size_t n_points = 0;
  std::size_t min_cluster_size = 0;
  std::vector<Cluster> clusters;
  std::vector<Fallout> fallouts;

  [[nodiscard]] std::vector<std::vector<std::uint32_t>> children() const {
    std::vector<std::vector<std::uint32_t>> out(clusters.size());
    for (const auto& c : clusters) {
      if (c.parent >= 0) out[static_cast<std::size_t>(c.parent)].push_back(c.id);
    }
    return out;
  }
};

/// Top-down condensation with an explicit stack.
///
/// Consecutive merges at one exact distance are treated as a single
/// multi-way split, so the result depends only on the level sets of the
/// tree and not on how equal-weight edges were ordered.
inline CondensedTree condense_tree(const SingleLinkageTree& slt, std::size_t min_cluster_size) {
  if (min_cluster_size < 2) throw ContractError("min_cluster_size must be >= 2");
  const std::size_t n = slt.n;
  if (n == 0) throw ContractError("empty single-linkage tree");
  CondensedTree ct;
  ct.n_points = n;
  ct.min_cluster_size = min_cluster_size;
  ct.clusters.push_back({0, -1, 0.0, static_cast<std::uint32_t>(n)});
  ct.fallouts.reserve(n);
  if (n == 1) {
    ct.fallouts.push_back({0, 0, 0.0});
    return ct;
  }

  struct Frame {
    std::uint32_t node;
    std::uint32_t cluster;
  };
  std::vector<Frame> stack{{static_cast<std::uint32_t>(2 * n - 2), 0}};
  std::vector<std::uint32_t> pieces;
  std::vector<std::uint32_t> scratch;
  std::vector<std::uint32_t> big;

  auto emit_points = [&](std::uint32_t piece, std::uint32_t cluster, double lambda) {
    scratch.clear();
    scratch.push_back(piece);
    while (!scratch.empty()) {
      const auto x = scratch.back();
      scratch.pop_back();
      if (x < n) {
        ct.fallouts.push_back({cluster, x, lambda});
      } else {
        const auto& m = slt.merges[x - n];
        scratch.push_back(m.right);
        scratch.push_back(m.left);
      }
    }
  };

  while (!stack.empty()) {
    const auto frame = stack.back();
    stack.pop_back();
    const double dist = slt.merges[frame.node - n].distance;
    const double lambda = lambda_of(dist);

    pieces.clear();
    scratch.clear();
    scratch.push_back(frame.node);
    while (!scratch.empty()) {
      const auto x = scratch.back();
      scratch.pop_back();
      if (x >= n && slt.merges[x - n].distance == dist) {
        scratch.push_back(slt.merges[x - n].right);
        scratch.push_back(slt.merges[x - n].left);
      } else {
        pieces.push_back(x);
      }
    }
    std::sort(pieces.begin(), pieces.end());

    big.clear();
    for (auto p : pieces) {
      if (slt.node_size(p) >= min_cluster_size) big.push_back(p);
    }
    for (auto p : pieces) {
      if (slt.node_size(p) < min_cluster_size) emit_points(p, frame.cluster, lambda);
    }
    if (big.size() == 1) {
      stack.push_back({big[0], frame.cluster});
    } else if (big.size() >= 2) {
      // push in reverse so the lowest new id is expanded first
      std::vector<Frame> fresh;
      for (auto p : big) {
        const auto id = static_cast<std::uint32_t>(ct.clusters.size());
        ct.clusters.push_back({id, frame.cluster, lambda, slt.node_size(p)});
        fresh.push_back({p, id});
      }
      stack.insert(stack.end(), fresh.rbegin(), fresh.rend());
    }
  }
  return ct;
}

/// Excess-of-mass stability and the selected antichain of clusters.
struct StabilityScores {
  std::vector<double> stability;
  std::vector<bool> selected;
};

inline std::vector<double> compute_stability(const CondensedTree& ct) {
  std::vector<double> s(ct.clusters.size(), 0.0);
  for (const auto& f : ct.fallouts) {
    s[f.cluster] += f.lambda - ct.clusters[f.cluster].lambda_birth;
  }
  for (const auto& c : ct.clusters) {
    if (c.parent < 0) continue;
    const auto p = static_cast<std::size_t>(c.parent);
    s[p] += static_cast<double>(c.size) * (c.lambda_birth - ct.clusters[p].lambda_birth);
  }
  return s;
}

struct Extraction {
  ClusterAssignment assignment;
  StabilityScores scores;
  /// Condensed-tree id of each output label, in label order.
  std::vector<std::uint32_t> label_clusters;
};

/// Selects stable clusters bottom-up and labels every point.
///
/// Labels are numbered by decreasing cluster size; strength is the point's
/// lambda divided by the largest lambda among its cluster's points.
inline Extraction extract(const CondensedTree& ct, bool allow_single_cluster) {
  const std::size_t nc = ct.clusters.size();
  const auto kids = ct.children();
  Extraction ex;
  ex.scores.stability = compute_stability(ct);
  ex.scores.selected.assign(nc, false);
  auto& stab = ex.scores.stability;
  auto& sel = ex.scores.selected;

  std::vector<double> subtree(nc, 0.0);
  for (std::size_t c = nc; c-- > 0;) {
    if (c == 0 && !allow_single_cluster) break;
    double child_sum = 0.0;
    for (auto ch : kids[c]) child_sum += subtree[ch];
    if (kids[c].empty() || stab[c] > child_sum) {
      sel[c] = true;
      subtree[c] = stab[c];
    } else {
      subtree[c] = child_sum;
    }
  }
  // keep only the topmost selections
  std::vector<bool> covered(nc, false);
  for (std::size_t c = 1; c < nc; ++c) {
    const auto p = static_cast<std::size_t>(ct.clusters[c].parent);
    covered[c] = covered[p] || sel[p];
    if (covered[c]) sel[c] = false;
  }

  std::vector<std::int64_t> owner(nc, -1);
  for (std::size_t c = 0; c < nc; ++c) {
    if (sel[c]) {
      owner[c] = static_cast<std::int64_t>(c);
    } else if (c > 0) {
      owner[c] = owner[static_cast<std::size_t>(ct.clusters[c].parent)];
    }
  }

  std::vector<std::size_t> count(nc, 0);
  std::vector<double> lambda_max(nc, 0.0);
  for (const auto& f : ct.fallouts) {
    const auto o = owner[f.cluster];
    if (o < 0) continue;
    ++count[static_cast<std::size_t>(o)];
    lambda_max[static_cast<std::size_t>(o)] =
        std::max(lambda_max[static_cast<std::size_t>(o)], f.lambda);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (sel[c]) ex.label_clusters.push_back(static_cast<std::uint32_t>(c));
  }
  std::stable_sort(ex.label_clusters.begin(), ex.label_clusters.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return count[a] > count[b]; });
  std::vector<Label> label_of(nc, kNoise);
  for (std::size_t i = 0; i < ex.label_clusters.size(); ++i) {
    label_of[ex.label_clusters[i]] = static_cast<Label>(i);
  }

  ex.assignment.labels.assign(ct.n_points, kNoise);
  ex.assignment.strengths.assign(ct.n_points, 0.0);
  for (const auto& f : ct.fallouts) {
    const auto o = owner[f.cluster];
    if (o < 0) continue;
    const auto oc = static_cast<std::size_t>(o);
    ex.assignment.labels[f.point] = label_of[oc];
    const double lm = lambda_max[oc];
    ex.assignment.strengths[f.point] = lm > 0.0 ? std::min(f.lambda, lm) / lm : 1.0;
  }
  return ex;
}

inline ClusterAssignment extract_clusters(const CondensedTree& ct, bool allow_single_cluster) {
  return extract(ct, allow_single_cluster).assignment;
}

/// JSON export for visualization tools. Pass scores to annotate clusters.
inline nlohmann::ordered_json condensed_tree_json(const CondensedTree& ct,
                                                  const StabilityScores* scores = nullptr) {
  nlohmann::ordered_json j;
  j["n_points"] = ct.n_points;
  j["min_cluster_size"] = ct.min_cluster_size;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& c : ct.clusters) {
    nlohmann::ordered_json node;
    node["id"] = c.id;
    node["parent"] = c.parent;
    node["lambda_birth"] = c.lambda_birth;
    node["size"] = c.size;
    if (scores) {
      node["stability"] = scores->stability[c.id];
      node["selected"] = static_cast<bool>(scores->selected[c.id]);
    }
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  auto falls = nlohmann::ordered_json::array();
  for (const auto& f : ct.fallouts) {
    falls.push_back({{"cluster", f.cluster}, {"point", f.point}, {"lambda", f.lambda}});
  }
  j["fallouts"] = std::move(falls);
  return j;
}

}  // namespace rc
