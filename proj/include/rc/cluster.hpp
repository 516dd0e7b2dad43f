#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rc/core.hpp"
#include "rc/hierarchy.hpp"
#include "rc/knn.hpp"
#include "rc/mst.hpp"
#include "rc/reach.hpp"

namespace rc {

enum class KnnMode { exact, ivf };

inline std::string_view to_string(KnnMode m) { return m == KnnMode::exact ? "exact" : "ivf"; }

struct ClusterParams {
  std::size_t min_cluster_size = 5;
  std::optional<std::size_t> min_samples;  // defaults to min_cluster_size
  std::optional<std::size_t> k;            // defaults to min_samples
  KnnMode mode = KnnMode::exact;
  std::optional<std::size_t> nlist;   // ivf: defaults to round(sqrt(n))
  std::optional<std::size_t> nprobe;  // ivf: defaults to max(1, nlist/16)
  std::uint64_t seed = 0;
  bool allow_single_cluster = false;
};

/// Parameters after defaults and clamping to the dataset size.
struct ResolvedParams {
  std::size_t min_cluster_size = 0;
  std::size_t min_samples = 0;
  std::size_t k = 0;
  KnnMode mode = KnnMode::exact;
  std::size_t nlist = 0;
  std::size_t nprobe = 0;
  std::uint64_t seed = 0;
  bool allow_single_cluster = false;
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct ClusterResult {
  ResolvedParams params;
  ClusterAssignment assignment;
  CondensedTree tree;
  StabilityScores scores;
  EdgeList spanning_edges;  // n-1 edges including synthetic joins
  std::size_t knn_components = 1;
  std::vector<StageTiming> timings;
};

/// Fills defaults. min_samples and k are clamped to n-1 so tiny inputs still run.
inline ResolvedParams resolve(const ClusterParams& p, std::size_t n) {
  if (p.min_cluster_size < 2) throw ContractError("min_cluster_size must be >= 2");
  ResolvedParams r;
  r.min_cluster_size = p.min_cluster_size;
  r.mode = p.mode;
  r.seed = p.seed;
  r.allow_single_cluster = p.allow_single_cluster;
  const std::size_t cap = n > 1 ? n - 1 : 0;
  r.min_samples = std::min(p.min_samples.value_or(p.min_cluster_size), cap);
  if (p.min_samples && *p.min_samples < 1) throw ContractError("min_samples must be >= 1");
  r.k = std::min(p.k.value_or(r.min_samples), cap);
  if (p.k && *p.k < r.min_samples) throw ContractError("k must be >= min_samples");
  if (r.mode == KnnMode::ivf && n > 1) {
    r.nlist = p.nlist.value_or(default_nlist(n));
    if (r.nlist < 1 || r.nlist > n) throw ContractError("nlist must be in [1, n]");
    r.nprobe = p.nprobe.value_or(default_nprobe(r.nlist));
    if (r.nprobe < 1 || r.nprobe > r.nlist) throw ContractError("nprobe must be in [1, nlist]");
  }
  return r;
}

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::vector<StageTiming>& out) : out_(out) {}
  void mark(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.push_back({std::move(stage), std::chrono::duration<double, std::milli>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<StageTiming>& out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// kNN graph -> core distances -> mutual reachability -> MST -> hierarchy -> clusters.
inline ClusterResult cluster(const PointSet& points, const ClusterParams& params) {
  const std::size_t n = points.size();
  ClusterResult res;
  res.params = resolve(params, n);
  const auto& rp = res.params;
  detail::StageTimer timer(res.timings);

  if (n == 1) {
    res.tree = condense_tree(SingleLinkageTree{1, {}}, rp.min_cluster_size);
    auto ex = extract(res.tree, rp.allow_single_cluster);
    res.assignment = std::move(ex.assignment);
    res.scores = std::move(ex.scores);
    return res;
  }

  KnnGraph knn;
  if (rp.mode == KnnMode::exact) {
    knn = brute_force_knn(points, rp.k);
  } else {
    const auto index = ivf_build(points, rp.nlist, rp.seed);
    timer.mark("ivf_build");
    knn = ivf_search(index, points, rp.k, rp.nprobe);
  }
  timer.mark("knn");
  const auto core = core_distances(knn, rp.min_samples);
  auto edges = mutual_reach_edges(knn, core);
  timer.mark("mutual_reachability");
  const auto forest = kruskal_forest(std::move(edges), n);
  res.knn_components = forest.component_count;
  res.spanning_edges = attach_forest_root(forest);
  timer.mark("mst");
  const auto slt = single_linkage(res.spanning_edges, n);
  timer.mark("single_linkage");
  res.tree = condense_tree(slt, rp.min_cluster_size);
  timer.mark("condense");
  auto ex = extract(res.tree, rp.allow_single_cluster);
  res.assignment = std::move(ex.assignment);
  res.scores = std::move(ex.scores);
  timer.mark("extract");
  return res;
}

inline nlohmann::ordered_json to_json(const ClusterParams& p) {
  using J = nlohmann::ordered_json;
  J j;
  j["min_cluster_size"] = p.min_cluster_size;
  j["min_samples"] = p.min_samples ? J(*p.min_samples) : J();
  j["k"] = p.k ? J(*p.k) : J();
  j["mode"] = std::string(to_string(p.mode));
  j["nlist"] = p.nlist ? J(*p.nlist) : J();
  j["nprobe"] = p.nprobe ? J(*p.nprobe) : J();
  j["seed"] = p.seed;
  j["allow_single_cluster"] = p.allow_single_cluster;
  return j;
}

inline nlohmann::ordered_json to_json(const ResolvedParams& p) {
  nlohmann::ordered_json j;
  j["min_cluster_size"] = p.min_cluster_size;
  j["min_samples"] = p.min_samples;
  j["k"] = p.k;
  j["mode"] = std::string(to_string(p.mode));
  if (p.mode == KnnMode::ivf) {
    j["nlist"] = p.nlist;
    j["nprobe"] = p.nprobe;
  }
  j["seed"] = p.seed;
  j["allow_single_cluster"] = p.allow_single_cluster;
  return j;
}

}  // namespace rc
