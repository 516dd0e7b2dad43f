#include <gtest/gtest.h>

#include <numeric>

#include "../support/reference_hdbscan.hpp"
#include "rc/cluster.hpp"
#include "rc/datagen.hpp"
#include "rc/eval.hpp"
#include "rc/hierarchy.hpp"
#include "rc/mst.hpp"
#include "rc/reach.hpp"

namespace {

rc::PointSet line(std::vector<float> xs) {
  const auto n = xs.size();
  return rc::PointSet(n, 1, std::move(xs));
}

rc::Dataset two_blobs(std::size_t n, std::uint64_t seed) {
  rc::SyntheticSpec s;
  s.n = n;
  s.centers = 2;
  s.cluster_std = 0.5;
  s.center_coords = {{0, 0}, {20, 20}};
  s.seed = seed;
  return rc::generate(s);
}

}  // namespace

TEST(CoreDistances, HandCase) {
  const auto g = rc::brute_force_knn(line({0, 1, 3}), 2);
  EXPECT_EQ(rc::core_distances(g, 1).values, (std::vector<double>{1, 1, 2}));
  EXPECT_EQ(rc::core_distances(g, 2).values, (std::vector<double>{3, 2, 3}));
  EXPECT_THROW(rc::core_distances(g, 3), rc::ContractError);
}

TEST(CoreDistances, DuplicateHasZeroCore) {
  const auto g = rc::brute_force_knn(line({2, 2, 7}), 1);
  EXPECT_EQ(rc::core_distances(g, 1).values[0], 0.0);
}

TEST(MutualReach, HandEdges) {
  const auto g = rc::brute_force_knn(line({0, 1, 3}), 2);
  const auto e = rc::mutual_reach_edges(g, rc::core_distances(g, 1));
  EXPECT_EQ(e, (rc::EdgeList{{0, 1, 1}, {0, 2, 3}, {1, 2, 2}}));
}

TEST(MutualReach, IdenticalPointsGiveZeroWeights) {
  const auto g = rc::brute_force_knn(line({4, 4, 4, 4}), 3);
  for (const auto& e : rc::mutual_reach_edges(g, rc::core_distances(g, 2))) EXPECT_EQ(e.w, 0.0);
}

TEST(MutualReach, DominatesCoreAndDistance) {
  const auto ds = two_blobs(200, 3);
  const auto g = rc::brute_force_knn(ds.points, 8);
  const auto core = rc::core_distances(g, 5);
  const auto edges = rc::mutual_reach_edges(g, core);
  EXPECT_LE(edges.size(), 200u * 8u);
  for (const auto& e : edges) {
    EXPECT_LT(e.u, e.v);
    EXPECT_GE(e.w, std::max(core.values[e.u], core.values[e.v]));
    EXPECT_GE(e.w, std::sqrt(rc::squared_distance(ds.points.row(e.u), ds.points.row(e.v))));
  }
  // every directed pair survives symmetrization
  for (std::size_t i = 0; i < 200; ++i) {
    for (auto j : g.ids(i)) {
      const auto u = std::min<rc::PointId>(static_cast<rc::PointId>(i), j);
      const auto v = std::max<rc::PointId>(static_cast<rc::PointId>(i), j);
      EXPECT_TRUE(std::any_of(edges.begin(), edges.end(),
                              [&](const rc::WeightedEdge& e) { return e.u == u && e.v == v; }));
    }
  }
}

TEST(Kruskal, HandMst) {
  const auto f = rc::kruskal_forest({{0, 2, 3}, {1, 2, 2}, {0, 1, 1}}, 3);
  EXPECT_EQ(f.edges, (rc::EdgeList{{0, 1, 1}, {1, 2, 2}}));
  EXPECT_EQ(f.total_weight(), 3.0);
  EXPECT_EQ(f.component_count, 1u);
}

TEST(Kruskal, EmptyEdgesGiveSingletons) {
  const auto f = rc::kruskal_forest({}, 4);
  EXPECT_EQ(f.component_count, 4u);
  EXPECT_TRUE(f.edges.empty());
}

TEST(Prim, MatchesKruskalOnHandCase) {
  const auto p = line({0, 1, 3});
  const auto g = rc::brute_force_knn(p, 2);
  const auto core = rc::core_distances(g, 1);
  const auto prim = rc::prim_dense(p, core);
  EXPECT_EQ(prim.edges, rc::kruskal_forest(rc::mutual_reach_edges(g, core), 3).edges);
  const auto one = rc::prim_dense(line({1}), rc::CoreDistances{{0.0}});
  EXPECT_TRUE(one.edges.empty());
  EXPECT_EQ(one.component_count, 1u);
}

TEST(Prim, NeverHeavierThanKnnForest) {
  const auto ds = two_blobs(500, 17);
  const auto g = rc::brute_force_knn(ds.points, 5);
  const auto core = rc::core_distances(g, 5);
  const auto prim = rc::prim_dense(ds.points, core);
  const auto joined = rc::attach_forest_root(rc::kruskal_forest(rc::mutual_reach_edges(g, core), 500));
  EXPECT_LE(prim.total_weight(), oracle::total_weight(joined));
  EXPECT_EQ(prim.component_count, 1u);
}

TEST(Kruskal, EqualsPrimOnRandomSets) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    rc::SyntheticSpec s;
    s.shape = rc::Shape::uniform_noise;
    s.n = 200;
    s.dim = 3;
    s.seed = seed;
    const auto p = rc::generate(s).points;
    const auto g = rc::brute_force_knn(p, 199);
    const auto core = rc::core_distances(g, 4);
    const auto k = rc::kruskal_forest(rc::mutual_reach_edges(g, core), 200);
    EXPECT_EQ(k.total_weight(), rc::prim_dense(p, core).total_weight());
  }
}

TEST(AttachForestRoot, AddsSyntheticEdges) {
  const auto one = rc::kruskal_forest({{0, 1, 1}, {1, 2, 1}}, 3);
  EXPECT_EQ(rc::attach_forest_root(one), one.edges);
  const auto three = rc::kruskal_forest({{0, 1, 1}, {1, 2, 1}, {3, 4, 1}, {4, 5, 1},
                                         {6, 7, 1}, {7, 8, 1}}, 9);
  EXPECT_EQ(three.component_count, 3u);
  const auto joined = rc::attach_forest_root(three);
  ASSERT_EQ(joined.size(), 8u);
  EXPECT_TRUE(std::isinf(joined[6].w));
  EXPECT_EQ(joined[6].v, 3u);
  EXPECT_EQ(joined[7].v, 6u);
}

TEST(AttachForestRoot, ComponentsBecomeIndependentSubtrees) {
  // two far blobs with k too small to bridge them
  const auto ds = two_blobs(100, 4);
  rc::ClusterParams p;
  p.min_cluster_size = 10;
  p.min_samples = 3;
  const auto r = rc::cluster(ds.points, p);
  EXPECT_EQ(r.knn_components, 2u);
  EXPECT_EQ(rc::adjusted_rand_index(r.assignment.labels, ds.truth), 1.0);
  for (std::size_t c = 1; c < r.tree.clusters.size(); ++c) {
    if (r.tree.clusters[c].parent == 0) EXPECT_EQ(r.tree.clusters[c].lambda_birth, 0.0);
  }
}

TEST(SingleLinkage, HandTrace) {
  const auto slt = rc::single_linkage({{0, 1, 1}, {1, 2, 2}}, 3);
  ASSERT_EQ(slt.merges.size(), 2u);
  EXPECT_EQ(slt.merges[0], (rc::SingleLinkageTree::Merge{0, 1, 1.0, 2}));
  EXPECT_EQ(slt.merges[1], (rc::SingleLinkageTree::Merge{3, 2, 2.0, 3}));
  EXPECT_TRUE(rc::single_linkage({}, 1).merges.empty());
}

TEST(SingleLinkage, RejectsNonTrees) {
  EXPECT_THROW(rc::single_linkage({{0, 1, 1}}, 3), rc::ContractError);
  EXPECT_THROW(rc::single_linkage({{0, 1, 1}, {1, 0, 2}}, 3), rc::ContractError);
  EXPECT_THROW(rc::single_linkage({{0, 1, 2}, {1, 2, 1}}, 3), rc::ContractError);
}

TEST(Condense, HandTrace) {
  const auto slt = rc::single_linkage({{0, 1, 1}, {1, 2, 2}}, 3);
  const auto ct = rc::condense_tree(slt, 2);
  ASSERT_EQ(ct.clusters.size(), 1u);
  ASSERT_EQ(ct.fallouts.size(), 3u);
  std::vector<double> lam(3);
  for (const auto& f : ct.fallouts) {
    EXPECT_EQ(f.cluster, 0u);
    lam[f.point] = f.lambda;
  }
  EXPECT_EQ(lam, (std::vector<double>{1.0, 1.0, 0.5}));
  EXPECT_THROW(rc::condense_tree(slt, 1), rc::ContractError);
}

TEST(Condense, TwoBlobsGiveTwoChildren) {
  const auto ds = two_blobs(100, 5);
  rc::ClusterParams p;
  p.min_cluster_size = 10;
  p.k = 99;
  const auto r = rc::cluster(ds.points, p);
  const auto kids = r.tree.children();
  EXPECT_EQ(kids[0].size(), 2u);
  EXPECT_EQ(r.assignment.num_clusters(), 2u);
  EXPECT_EQ(r.assignment.noise_count(), 0u);
  EXPECT_EQ(rc::adjusted_rand_index(r.assignment.labels, ds.truth), 1.0);
}

TEST(Condense, MinClusterSizeAboveN) {
  const auto ds = two_blobs(30, 6);
  rc::ClusterParams p;
  p.min_cluster_size = 31;
  p.min_samples = 3;
  const auto r = rc::cluster(ds.points, p);
  EXPECT_EQ(r.tree.clusters.size(), 1u);
  EXPECT_EQ(r.tree.fallouts.size(), 30u);
  EXPECT_EQ(r.assignment.noise_count(), 30u);
}

TEST(Condense, DeepChainWithoutRecursion) {
  const std::size_t n = 1'000'000;
  rc::EdgeList edges(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    edges[i] = {static_cast<rc::PointId>(i), static_cast<rc::PointId>(i + 1), 1.0 + static_cast<double>(i)};
  }
  const auto ct = rc::condense_tree(rc::single_linkage(edges, n), 2);
  EXPECT_EQ(ct.fallouts.size(), n);
}

TEST(Extract, UniformNoiseIsMostlyNoise) {
  // single draws can hold chance clumps, so judge the pooled noise fraction
  std::size_t noise = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    rc::SyntheticSpec s;
    s.shape = rc::Shape::uniform_noise;
    s.n = 500;
    s.seed = seed;
    rc::ClusterParams p;
    p.min_cluster_size = 25;
    noise += rc::cluster(rc::generate(s).points, p).assignment.noise_count();
  }
  EXPECT_GT(static_cast<double>(noise) / (20.0 * 500.0), 0.5);
}

TEST(Extract, IdenticalPointsSingleCluster) {
  const rc::PointSet p(20, 2, std::vector<float>(40, 3.0f));
  rc::ClusterParams params;
  params.min_cluster_size = 5;
  params.allow_single_cluster = true;
  const auto r = rc::cluster(p, params);
  EXPECT_EQ(r.assignment.num_clusters(), 1u);
  EXPECT_EQ(r.assignment.noise_count(), 0u);
}

TEST(Extract, StabilityNonNegativeAndAntichain) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    rc::SyntheticSpec s;
    s.n = 400;
    s.centers = 4;
    s.seed = seed;
    const auto ds = rc::generate(s);
    rc::ClusterParams p;
    p.min_cluster_size = 8;
    const auto r = rc::cluster(ds.points, p);
    for (auto v : r.scores.stability) EXPECT_GE(v, 0.0);
    for (std::size_t c = 0; c < r.tree.clusters.size(); ++c) {
      if (!r.scores.selected[c]) continue;
      for (auto a = r.tree.clusters[c].parent; a >= 0; a = r.tree.clusters[static_cast<std::size_t>(a)].parent) {
        EXPECT_FALSE(r.scores.selected[static_cast<std::size_t>(a)]);
      }
    }
    EXPECT_NO_THROW(r.assignment.validate());
  }
}

TEST(Pipeline, MatchesDenseOracle) {
  for (auto shape : rc::kAllShapes) {
    rc::SyntheticSpec s;
    s.shape = shape;
    s.n = 300;
    s.seed = 77;
    const auto ds = rc::generate(s);
    rc::ClusterParams p;
    p.min_cluster_size = 10;
    p.min_samples = 6;
    p.k = 299;
    const auto r = rc::cluster(ds.points, p);
    const auto ref = oracle::hdbscan(ds.points, 10, 6);
    EXPECT_EQ(rc::adjusted_rand_index(r.assignment.labels, ref.labels), 1.0) << rc::to_string(shape);
  }
}

TEST(Pipeline, ThreadCountDoesNotChangeLabels) {
  rc::SyntheticSpec s;
  s.n = 3000;
  s.dim = 5;
  s.centers = 6;
  s.seed = 31;
  const auto ds = rc::generate(s);
  rc::ClusterParams p;
  p.min_cluster_size = 20;
  p.mode = rc::KnnMode::ivf;
  rc::set_thread_count(1);
  const auto a = rc::cluster(ds.points, p);
  rc::set_thread_count(6);
  const auto b = rc::cluster(ds.points, p);
  EXPECT_EQ(a.assignment.labels, b.assignment.labels);
  EXPECT_EQ(a.assignment.strengths, b.assignment.strengths);
}

TEST(SortEdges, MatchesReferenceOrderWithTies) {
  rc::Rng rng(4);
  rc::EdgeList edges(200000);
  for (auto& e : edges) {
    e.u = static_cast<rc::PointId>(rng.below(500));
    e.v = static_cast<rc::PointId>(rng.below(500));
    e.w = rng.below(4) == 0 ? 0.0 : static_cast<double>(rng.below(1000)) / 7.0;
  }
  edges.push_back({1, 2, rc::kInfiniteWeight});
  auto expect = edges;
  std::sort(expect.begin(), expect.end(), [](const rc::WeightedEdge& a, const rc::WeightedEdge& b) {
    return std::tie(a.w, a.u, a.v) < std::tie(b.w, b.u, b.v);
  });
  rc::set_thread_count(1);
  auto one = edges;
  rc::sort_edges(one);
  rc::set_thread_count(5);
  auto five = edges;
  rc::sort_edges(five);
  EXPECT_EQ(one, expect);
  EXPECT_EQ(five, expect);
}
