#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

#include "rc/core.hpp"
#include "rc/knn.hpp"
#include "rc/parallel.hpp"

namespace rc {

/// Clustered training set used to label new points by distance-weighted kNN vote.
struct InductiveModel {
  PointSet train_points;
  ClusterAssignment train_labels;
  std::size_t k_assign = 5;

  void validate() const {
    if (train_labels.labels.size() != train_points.size()) {
      throw ContractError("model labels are not aligned with training points");
    }
    if (k_assign < 1) throw ContractError("k_assign must be >= 1");
  }
};

/// Labels each query by a 1/d weighted vote of its k_assign nearest training
/// points. Noise-labelled neighbours vote for noise. Exact matches (d = 0)
/// outvote everything and share one vote each. Ties go to the smaller label.
/// The reported strength is the winning label's share of the vote.
inline ClusterAssignment assign_new_points(const InductiveModel& model, const PointSet& queries) {
  model.validate();
  if (queries.dim() != model.train_points.dim()) {
    throw ContractError("query dimension " + std::to_string(queries.dim()) +
                        " does not match training dimension " +
                        std::to_string(model.train_points.dim()));
  }
  const std::size_t n_train = model.train_points.size();
  const std::size_t k = std::min(model.k_assign, n_train);
  ClusterAssignment out;
  out.labels.assign(queries.size(), kNoise);
  out.strengths.assign(queries.size(), 0.0);
  parallel_for(0, queries.size(), [&](std::size_t q) {
    detail::TopK top(k);
    const auto row = queries.row(q);
    for (std::size_t j = 0; j < n_train; ++j) {
      top.push(squared_distance(row, model.train_points.row(j)), static_cast<PointId>(j));
    }
    std::vector<PointId> ids(k);
    std::vector<double> dists(k);
    top.drain(ids, dists);

    std::map<Label, double> votes;
    const bool exact = dists[0] == 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto label = model.train_labels.labels[ids[j]];
      if (exact) {
        if (dists[j] == 0.0) votes[label] += 1.0;
      } else {
        votes[label] += 1.0 / dists[j];
      }
    }
    double total = 0.0;
    Label best = kNoise;
    double best_vote = -1.0;
    for (const auto& [label, v] : votes) {  // ascending label order
      total += v;
      if (v > best_vote) {
        best_vote = v;
        best = label;
      }
    }
    out.labels[q] = best;
    out.strengths[q] = best == kNoise ? 0.0 : best_vote / total;
  }, 16);
  return out;
}

}  // namespace rc
