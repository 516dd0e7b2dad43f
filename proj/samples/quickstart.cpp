// Cluster three gaussian blobs and compare with the generator's labels.
#include <iostream>

#include "rc/cluster.hpp"
#include "rc/datagen.hpp"
#include "rc/eval.hpp"

int main() {
  rc::SyntheticSpec spec;
  spec.shape = rc::Shape::blobs;
  spec.n = 600;
  spec.seed = 7;
  const auto data = rc::generate(spec);

  rc::ClusterParams params;
  params.min_cluster_size = 15;
  const auto result = rc::cluster(data.points, params);

  std::cout << "clusters: " << result.assignment.num_clusters()
            << "  noise: " << result.assignment.noise_count()
            << "  ARI: " << rc::adjusted_rand_index(result.assignment.labels, data.truth) << "\n";
  for (const auto& t : result.timings) std::cout << "  " << t.stage << " " << t.ms << " ms\n";
}
