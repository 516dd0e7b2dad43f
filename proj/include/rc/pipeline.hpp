#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rc/cluster.hpp"
#include "rc/core.hpp"
#include "rc/eval.hpp"
#include "rc/predict.hpp"
#include "rc/random.hpp"
#include "rc/session_features.hpp"

namespace rc {

// ---------------------------------------------------------------------------
// Risky clusters

struct RiskyClusterConfig {
  std::size_t min_cluster_size_for_flag = 20;
  double min_fraud_density = 0.5;
  double min_mean_strength = 0.0;  // mean membership strength, our reading of "coherence"

  void validate() const {
    if (min_fraud_density < 0.0 || min_fraud_density > 1.0) {
      throw ContractError("min_fraud_density must be in [0, 1]");
    }
    if (min_mean_strength < 0.0 || min_mean_strength > 1.0) {
      throw ContractError("min_mean_strength must be in [0, 1]");
    }
  }
};

struct ClusterStats {
  Label label = kNoise;
  std::size_t size = 0;
  std::size_t labeled = 0;  // members whose risk seed may be used
  std::size_t seeded = 0;   // labeled members with a risk seed
  double fraud_density = 0.0;
  double mean_strength = 0.0;
  bool flagged = false;
};

struct RiskySelection {
  std::vector<ClusterStats> clusters;  // one per label, ascending
  std::set<Label> risky;

  [[nodiscard]] bool is_risky(Label l) const { return risky.count(l) > 0; }
};

/// Flags clusters by size, fraud density and mean strength. Noise is never flagged.
///
/// Density is seeded/labeled, where `labeled` (if given) marks the members
/// whose seeds may be read; other members still count toward size.
inline RiskySelection select_risky_clusters(const ClusterAssignment& assignment,
                                            std::span<const TransactionRecord> records,
                                            const RiskyClusterConfig& config,
                                            const std::vector<bool>* labeled = nullptr) {
  config.validate();
  if (records.size() != assignment.size()) {
    throw ContractError("assignment and records are not aligned");
  }
  if (labeled && labeled->size() != records.size()) {
    throw ContractError("labeled mask is not aligned with records");
  }
  RiskySelection sel;
  const std::size_t k = assignment.num_clusters();
  sel.clusters.resize(k);
  std::vector<double> strength_sum(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) sel.clusters[c].label = static_cast<Label>(c);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto l = assignment.labels[i];
    if (l == kNoise) continue;
    auto& st = sel.clusters[static_cast<std::size_t>(l)];
    ++st.size;
    strength_sum[static_cast<std::size_t>(l)] += assignment.strengths[i];
    if (labeled && !(*labeled)[i]) continue;
    ++st.labeled;
    if (is_risk_seed(records[i].risk_seed)) ++st.seeded;
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto& st = sel.clusters[c];
    st.fraud_density = st.labeled ? static_cast<double>(st.seeded) / st.labeled : 0.0;
    st.mean_strength = st.size ? strength_sum[c] / static_cast<double>(st.size) : 0.0;
    st.flagged = st.size >= config.min_cluster_size_for_flag &&
                 st.fraud_density >= config.min_fraud_density &&
                 st.mean_strength >= config.min_mean_strength;
    if (st.flagged) sel.risky.insert(st.label);
  }
  return sel;
}

inline nlohmann::ordered_json to_json(const ClusterStats& s) {
  return {{"label", s.label},           {"size", s.size},
          {"labeled", s.labeled},       {"seeded", s.seeded},
          {"fraud_density", s.fraud_density}, {"mean_strength", s.mean_strength},
          {"flagged", s.flagged}};
}

// ---------------------------------------------------------------------------
// Experiment configuration

enum class ExperimentMode { inductive, transductive };

struct SamplingConfig {
  bool enabled = false;
  std::size_t max_train = 0;         // 0 = keep every training record
  double half_life_snapshots = 2.0;  // time-decay weight halves per this many snapshots
  std::uint64_t seed = 0;
};

inline ClusterParams experiment_cluster_defaults() {
  ClusterParams p;
  p.min_cluster_size = 30;
  return p;
}

struct ExperimentSpec {
  ExperimentMode mode = ExperimentMode::inductive;
  std::int64_t snapshot_ms = 86'400'000;
  std::optional<std::int64_t> origin_ms;  // default: earliest timestamp
  std::size_t train_snapshots = 3;
  std::vector<std::string> feature_columns;  // empty: every feature name in the data
  bool use_session_features = true;
  bool standardize = true;
  ClusterParams clustering = experiment_cluster_defaults();
  RiskyClusterConfig risky;
  SamplingConfig sampling;
  std::size_t k_assign = 5;

  void validate() const {
    if (snapshot_ms <= 0) throw ContractError("snapshot_ms must be > 0");
    if (train_snapshots < 1) throw ContractError("train_snapshots must be >= 1");
    if (k_assign < 1) throw ContractError("k_assign must be >= 1");
    if (sampling.half_life_snapshots <= 0.0) throw ContractError("half_life_snapshots must be > 0");
    risky.validate();
  }
};

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace detail

inline ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  if (!j.is_object()) throw ContractError("experiment config must be a JSON object");
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    if (m == "inductive") {
      s.mode = ExperimentMode::inductive;
    } else if (m == "transductive") {
      s.mode = ExperimentMode::transductive;
    } else {
      throw ContractError("unknown experiment mode '" + m + "'");
    }
  }
  detail::read_opt(j, "snapshot_ms", s.snapshot_ms);
  if (j.contains("origin_ms") && !j.at("origin_ms").is_null()) {
    s.origin_ms = j.at("origin_ms").get<std::int64_t>();
  }
  detail::read_opt(j, "train_snapshots", s.train_snapshots);
  detail::read_opt(j, "feature_columns", s.feature_columns);
  detail::read_opt(j, "use_session_features", s.use_session_features);
  detail::read_opt(j, "standardize", s.standardize);
  detail::read_opt(j, "k_assign", s.k_assign);
  if (j.contains("clustering")) {
    const auto& c = j.at("clustering");
    detail::read_opt(c, "min_cluster_size", s.clustering.min_cluster_size);
    if (c.contains("min_samples")) s.clustering.min_samples = c.at("min_samples").get<std::size_t>();
    if (c.contains("k")) s.clustering.k = c.at("k").get<std::size_t>();
    if (c.contains("mode")) {
      const auto m = c.at("mode").get<std::string>();
      if (m != "exact" && m != "ivf") throw ContractError("clustering mode must be exact or ivf");
      s.clustering.mode = m == "exact" ? KnnMode::exact : KnnMode::ivf;
    }
    if (c.contains("nlist")) s.clustering.nlist = c.at("nlist").get<std::size_t>();
    if (c.contains("nprobe")) s.clustering.nprobe = c.at("nprobe").get<std::size_t>();
    detail::read_opt(c, "seed", s.clustering.seed);
    detail::read_opt(c, "allow_single_cluster", s.clustering.allow_single_cluster);
  }
  if (j.contains("risky")) {
    const auto& r = j.at("risky");
    detail::read_opt(r, "min_cluster_size_for_flag", s.risky.min_cluster_size_for_flag);
    detail::read_opt(r, "min_fraud_density", s.risky.min_fraud_density);
    detail::read_opt(r, "min_mean_strength", s.risky.min_mean_strength);
  }
  if (j.contains("sampling")) {
    const auto& r = j.at("sampling");
    detail::read_opt(r, "enabled", s.sampling.enabled);
    detail::read_opt(r, "max_train", s.sampling.max_train);
    detail::read_opt(r, "half_life_snapshots", s.sampling.half_life_snapshots);
    detail::read_opt(r, "seed", s.sampling.seed);
  }
  s.validate();
  return s;
}

inline nlohmann::ordered_json to_json(const ExperimentSpec& s) {
  nlohmann::ordered_json j;
  j["mode"] = s.mode == ExperimentMode::inductive ? "inductive" : "transductive";
  j["snapshot_ms"] = s.snapshot_ms;
  j["origin_ms"] = s.origin_ms ? nlohmann::ordered_json(*s.origin_ms) : nlohmann::ordered_json();
  j["train_snapshots"] = s.train_snapshots;
  j["feature_columns"] = s.feature_columns;
  j["use_session_features"] = s.use_session_features;
  j["standardize"] = s.standardize;
  j["k_assign"] = s.k_assign;
  j["clustering"] = to_json(s.clustering);
  j["risky"] = {{"min_cluster_size_for_flag", s.risky.min_cluster_size_for_flag},
                {"min_fraud_density", s.risky.min_fraud_density},
                {"min_mean_strength", s.risky.min_mean_strength}};
  j["sampling"] = {{"enabled", s.sampling.enabled},
                   {"max_train", s.sampling.max_train},
                   {"half_life_snapshots", s.sampling.half_life_snapshots},
                   {"seed", s.sampling.seed}};
  return j;
}

// ---------------------------------------------------------------------------
// Feature assembly and sampling

/// Hybrid behaviour matrix: named numeric columns, then session features.
struct FeatureTable {
  std::vector<std::string> names;
  std::size_t rows = 0;
  std::vector<double> values;  // row-major
};

inline std::vector<std::string> resolve_feature_columns(const ExperimentSpec& spec,
                                                        std::span<const TransactionRecord> records) {
  if (!spec.feature_columns.empty()) return spec.feature_columns;
  std::set<std::string> names;
  for (const auto& r : records) {
    for (const auto& [name, _] : r.features) names.insert(name);
  }
  return {names.begin(), names.end()};
}

inline FeatureTable build_feature_table(std::span<const TransactionRecord> records,
                                        std::span<const std::size_t> rows,
                                        const std::vector<std::string>& columns,
                                        bool use_session_features) {
  FeatureTable t;
  t.names = columns;
  if (use_session_features) {
    for (auto& n : session_feature_names()) t.names.push_back(n);
  }
  if (t.names.empty()) throw ContractError("no feature columns to cluster on");
  t.rows = rows.size();
  t.values.reserve(rows.size() * t.names.size());
  for (auto idx : rows) {
    const auto& r = records[idx];
    for (const auto& c : columns) {
      const auto it = r.features.find(c);
      if (it == r.features.end()) {
        throw ContractError("transaction " + r.id + " lacks feature '" + c + "'");
      }
      t.values.push_back(it->second);
    }
    if (use_session_features) {
      if (!r.session) throw ContractError("transaction " + r.id + " has no click session");
      const auto sf = extract_session_features(*r.session).values();
      t.values.insert(t.values.end(), sf.begin(), sf.end());
    }
  }
  return t;
}

/// Z-scores columns with statistics from rows [0, fit_rows); constant columns are centred only.
inline void standardize_columns(FeatureTable& t, std::size_t fit_rows) {
  const std::size_t d = t.names.size();
  if (fit_rows == 0) return;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < fit_rows; ++i) mean += t.values[i * d + j];
    mean /= static_cast<double>(fit_rows);
    double var = 0.0;
    for (std::size_t i = 0; i < fit_rows; ++i) {
      const double dev = t.values[i * d + j] - mean;
      var += dev * dev;
    }
    var /= static_cast<double>(fit_rows);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < t.rows; ++i) t.values[i * d + j] = (t.values[i * d + j] - mean) / sd;
  }
}

inline PointSet to_points(const FeatureTable& t) {
  std::vector<float> data(t.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(t.values[i]);
  return PointSet(t.rows, t.names.size(), std::move(data));
}

/// Stratified, time-decayed sample of training rows.
///
/// Strata are risk-seeded vs other records; each keeps its share of the
/// quota. Within a stratum rows are drawn without replacement with weight
/// 0.5^(age / half_life), age in snapshots before `newest_snapshot`.
inline std::vector<std::size_t> stratified_sample(std::span<const TransactionRecord> records,
                                                  std::span<const std::size_t> rows,
                                                  std::span<const std::int64_t> snapshot_of,
                                                  std::int64_t newest_snapshot,
                                                  const SamplingConfig& cfg, std::uint64_t salt) {
  std::vector<std::size_t> out(rows.begin(), rows.end());
  if (!cfg.enabled || cfg.max_train == 0 || rows.size() <= cfg.max_train) return out;
  std::array<std::vector<std::size_t>, 2> strata;
  for (auto r : rows) strata[is_risk_seed(records[r].risk_seed) ? 1 : 0].push_back(r);
  std::array<std::size_t, 2> quota{};
  quota[1] = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.max_train) *
                                                   static_cast<double>(strata[1].size()) /
                                                   static_cast<double>(rows.size())));
  quota[1] = std::min(quota[1], strata[1].size());
  quota[0] = std::min(cfg.max_train - quota[1], strata[0].size());

  Rng rng(cfg.seed ^ (salt * 0x9e3779b97f4a7c15ULL));
  out.clear();
  for (std::size_t s = 0; s < 2; ++s) {
    // Efraimidis-Spirakis: keep the largest log(u)/w keys
    std::vector<std::pair<double, std::size_t>> keyed;
    for (auto r : strata[s]) {
      const double age = static_cast<double>(newest_snapshot - snapshot_of[r]);
      const double w = std::pow(0.5, age / cfg.half_life_snapshots);
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      keyed.push_back({std::log(u) / w, r});
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (std::size_t i = 0; i < quota[s]; ++i) out.push_back(keyed[i].second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Experiment runner

struct TestPrediction {
  std::size_t record = 0;
  std::size_t window = 0;
  Label cluster = kNoise;
  double strength = 0.0;
  bool predicted_fraud = false;
  bool actual_fraud = false;
};

struct WindowResult {
  std::size_t window = 0;
  std::int64_t first_train_snapshot = 0;
  std::int64_t test_snapshot = 0;
  std::size_t train_available = 0;
  std::vector<std::size_t> train_records;  // after sampling
  std::vector<std::size_t> test_records;
  std::vector<Label> train_labels;  // cluster of each train record
  std::size_t num_clusters = 0;
  std::size_t noise_count = 0;
  RiskySelection risky;
};

struct ExperimentResult {
  FraudReport report;
  std::vector<WindowResult> windows;
  std::vector<TestPrediction> predictions;
  std::vector<std::string> feature_names;
};

/// Runs the inductive or transductive fraud experiment.
///
/// Records are bucketed into snapshots of `snapshot_ms` from the origin.
/// Inductive: cluster snapshots [0, n), flag risky clusters, label snapshot
/// n through the kNN vote. Transductive: for every test snapshot t >= n,
/// cluster the (sampled) window [t-n, t) jointly with t; a test record is
/// fraudulent iff its cluster is risky. Only training members' seeds are
/// read. Ground truth for scoring is the confirmed_fraud seed.
inline ExperimentResult run_experiment(const ExperimentSpec& spec,
                                       const std::vector<TransactionRecord>& data) {
  spec.validate();
  if (data.empty()) throw ContractError("experiment data is empty");
  std::int64_t origin = std::numeric_limits<std::int64_t>::max();
  for (const auto& r : data) origin = std::min(origin, r.timestamp);
  if (spec.origin_ms) origin = *spec.origin_ms;

  std::vector<std::int64_t> snapshot_of(data.size());
  std::int64_t last_snapshot = -1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto delta = data[i].timestamp - origin;
    snapshot_of[i] = delta < 0 ? -1 : delta / spec.snapshot_ms;
    last_snapshot = std::max(last_snapshot, snapshot_of[i]);
  }
  const auto n_train = static_cast<std::int64_t>(spec.train_snapshots);
  if (last_snapshot < n_train) {
    throw ContractError("data does not reach the first test snapshot (" + std::to_string(n_train) +
                        ")");
  }
  const auto columns = resolve_feature_columns(spec, data);

  ExperimentResult result;
  std::vector<bool> predicted_all;
  std::vector<bool> actual_all;
  std::vector<double> amounts_all;

  const std::int64_t last_test = spec.mode == ExperimentMode::inductive ? n_train : last_snapshot;
  for (std::int64_t t = n_train; t <= last_test; ++t) {
    WindowResult w;
    w.window = result.windows.size();
    w.first_train_snapshot = t - n_train;
    w.test_snapshot = t;
    std::vector<std::size_t> train_pool;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (snapshot_of[i] >= t - n_train && snapshot_of[i] < t) train_pool.push_back(i);
      if (snapshot_of[i] == t) w.test_records.push_back(i);
    }
    if (train_pool.empty() || w.test_records.empty()) {
      throw ContractError("empty window: test snapshot " + std::to_string(t));
    }
    w.train_available = train_pool.size();
    w.train_records = stratified_sample(data, train_pool, snapshot_of, t - 1, spec.sampling,
                                        static_cast<std::uint64_t>(t));
    // the test window must never feed the training clustering
    for (auto i : w.train_records) {
      if (snapshot_of[i] >= t) throw std::logic_error("test record leaked into training window");
    }

    std::vector<std::size_t> rows = w.train_records;
    rows.insert(rows.end(), w.test_records.begin(), w.test_records.end());
    auto table = build_feature_table(data, rows, columns, spec.use_session_features);
    if (spec.standardize) standardize_columns(table, w.train_records.size());
    result.feature_names = table.names;
    const auto all_points = to_points(table);
    const std::size_t ntr = w.train_records.size();

    std::vector<Label> test_labels;
    std::vector<double> test_strengths;
    if (spec.mode == ExperimentMode::inductive) {
      std::vector<std::size_t> tr(ntr);
      std::vector<std::size_t> te(w.test_records.size());
      for (std::size_t i = 0; i < ntr; ++i) tr[i] = i;
      for (std::size_t i = 0; i < te.size(); ++i) te[i] = ntr + i;
      auto train_points = all_points.subset(tr);
      const auto clustered = cluster(train_points, spec.clustering);
      std::vector<TransactionRecord> train_recs;
      for (auto i : w.train_records) train_recs.push_back(data[i]);
      w.risky = select_risky_clusters(clustered.assignment, train_recs, spec.risky);
      w.num_clusters = clustered.assignment.num_clusters();
      w.noise_count = clustered.assignment.noise_count();
      w.train_labels = clustered.assignment.labels;
      InductiveModel model{std::move(train_points), clustered.assignment, spec.k_assign};
      const auto assigned = assign_new_points(model, all_points.subset(te));
      test_labels = assigned.labels;
      test_strengths = assigned.strengths;
    } else {
      const auto clustered = cluster(all_points, spec.clustering);
      std::vector<TransactionRecord> recs;
      for (auto i : rows) recs.push_back(data[i]);
      std::vector<bool> labeled(rows.size(), false);
      std::fill(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(ntr), true);
      w.risky = select_risky_clusters(clustered.assignment, recs, spec.risky, &labeled);
      w.num_clusters = clustered.assignment.num_clusters();
      w.noise_count = clustered.assignment.noise_count();
      w.train_labels.assign(clustered.assignment.labels.begin(),
                            clustered.assignment.labels.begin() + static_cast<std::ptrdiff_t>(ntr));
      test_labels.assign(clustered.assignment.labels.begin() + static_cast<std::ptrdiff_t>(ntr),
                         clustered.assignment.labels.end());
      test_strengths.assign(
          clustered.assignment.strengths.begin() + static_cast<std::ptrdiff_t>(ntr),
          clustered.assignment.strengths.end());
    }

    for (std::size_t i = 0; i < w.test_records.size(); ++i) {
      const auto rec = w.test_records[i];
      TestPrediction p;
      p.record = rec;
      p.window = w.window;
      p.cluster = test_labels[i];
      p.strength = test_strengths[i];
      p.predicted_fraud = p.cluster != kNoise && w.risky.is_risky(p.cluster);
      p.actual_fraud = data[rec].risk_seed == RiskSeed::confirmed_fraud;
      predicted_all.push_back(p.predicted_fraud);
      actual_all.push_back(p.actual_fraud);
      amounts_all.push_back(data[rec].amount);
      result.predictions.push_back(p);
    }
    result.windows.push_back(std::move(w));
  }
  result.report = fraud_metrics(predicted_all, actual_all, amounts_all);
  return result;
}

inline nlohmann::ordered_json cluster_stats_json(const ExperimentResult& r) {
  auto windows = nlohmann::ordered_json::array();
  for (const auto& w : r.windows) {
    nlohmann::ordered_json j;
    j["window"] = w.window;
    j["train_snapshots"] = {w.first_train_snapshot, w.test_snapshot - 1};
    j["test_snapshot"] = w.test_snapshot;
    j["train_available"] = w.train_available;
    j["train_used"] = w.train_records.size();
    j["test_size"] = w.test_records.size();
    j["num_clusters"] = w.num_clusters;
    j["noise_count"] = w.noise_count;
    j["risky_clusters"] = std::vector<Label>(w.risky.risky.begin(), w.risky.risky.end());
    auto stats = nlohmann::ordered_json::array();
    for (const auto& s : w.risky.clusters) stats.push_back(to_json(s));
    j["clusters"] = std::move(stats);
    windows.push_back(std::move(j));
  }
  return {{"windows", std::move(windows)}};
}

}  // namespace rc
