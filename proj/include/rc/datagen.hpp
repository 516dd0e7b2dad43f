#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rc/core.hpp"
#include "rc/random.hpp"

namespace rc {

enum class Shape { blobs, moons, circles, anisotropic, varied_variance, uniform_noise };

inline constexpr std::array kAllShapes{Shape::blobs,       Shape::moons,
                                       Shape::circles,     Shape::anisotropic,
                                       Shape::varied_variance, Shape::uniform_noise};

inline std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::blobs: return "blobs";
    case Shape::moons: return "moons";
    case Shape::circles: return "circles";
    case Shape::anisotropic: return "anisotropic";
    case Shape::varied_variance: return "varied_variance";
    case Shape::uniform_noise: return "uniform_noise";
  }
  return "blobs";
}

inline std::optional<Shape> parse_shape(std::string_view s) {
  for (auto shape : kAllShapes) {
    if (to_string(shape) == s) return shape;
  }
  return std::nullopt;
}

/// Generator parameters. Defaults follow the usual scikit-learn toy datasets.
struct SyntheticSpec {
  Shape shape = Shape::blobs;
  std::size_t n = 300;
  std::size_t dim = 2;          // moons and circles are always 2-D
  double noise = 0.05;          // gaussian jitter for moons/circles
  std::uint64_t seed = 0;
  std::size_t centers = 3;      // blob-like shapes
  double center_box = 10.0;     // random centers drawn from [-box, box]^dim
  double cluster_std = 1.0;
  std::vector<double> stds;     // per-center std; varied_variance default {1.0, 2.5, 0.5}
  std::vector<std::vector<double>> center_coords;  // explicit centers override
  double factor = 0.5;          // circles inner/outer radius ratio
};

struct Dataset {
  PointSet points;
  std::vector<Label> truth;
};

namespace detail {

inline Dataset make_blobs(const SyntheticSpec& spec, Rng& rng, const std::vector<double>& stds) {
  const std::size_t dim = spec.dim;
  std::vector<std::vector<double>> centers = spec.center_coords;
  if (centers.empty()) {
    for (std::size_t c = 0; c < spec.centers; ++c) {
      std::vector<double> ctr(dim);
      for (auto& v : ctr) v = rng.uniform(-spec.center_box, spec.center_box);
      centers.push_back(std::move(ctr));
    }
  }
  const std::size_t nc = centers.size();
  if (nc == 0) throw ContractError("blobs need at least one center");
  for (const auto& c : centers) {
    if (c.size() != dim) throw ContractError("center dimensionality mismatch");
  }
  std::vector<float> data;
  data.reserve(spec.n * dim);
  std::vector<Label> truth;
  truth.reserve(spec.n);
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t count = spec.n / nc + (c < spec.n % nc ? 1 : 0);
    const double sd = stds.empty() ? spec.cluster_std : stds[c % stds.size()];
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        data.push_back(static_cast<float>(rng.normal(centers[c][j], sd)));
      }
      truth.push_back(static_cast<Label>(c));
    }
  }
  return {PointSet(spec.n, dim, std::move(data)), std::move(truth)};
}

}  // namespace detail

/// Points plus ground-truth labels; identical output for identical specs.
inline Dataset generate(const SyntheticSpec& spec) {
  if (spec.n < 1) throw ContractError("synthetic n must be >= 1");
  if (spec.dim < 1) throw ContractError("synthetic dim must be >= 1");
  if (spec.noise < 0.0) throw ContractError("synthetic noise must be >= 0");
  Rng rng(spec.seed);
  switch (spec.shape) {
    case Shape::blobs:
      return detail::make_blobs(spec, rng, spec.stds);
    case Shape::varied_variance:
      return detail::make_blobs(spec, rng,
                                spec.stds.empty() ? std::vector<double>{1.0, 2.5, 0.5} : spec.stds);
    case Shape::anisotropic: {
      auto ds = detail::make_blobs(spec, rng, spec.stds);
      if (spec.dim < 2) return ds;
      std::vector<float> data(ds.points.data().begin(), ds.points.data().end());
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double x = data[i * spec.dim];
        const double y = data[i * spec.dim + 1];
        data[i * spec.dim] = static_cast<float>(0.6 * x - 0.4 * y);
        data[i * spec.dim + 1] = static_cast<float>(-0.6 * x + 0.8 * y);
      }
      return {PointSet(spec.n, spec.dim, std::move(data)), std::move(ds.truth)};
    }
    case Shape::moons:
    case Shape::circles: {
      const std::size_t n_out = spec.n / 2;
      const std::size_t n_in = spec.n - n_out;
      std::vector<float> data;
      data.reserve(spec.n * 2);
      std::vector<Label> truth;
      auto emit = [&](double x, double y, Label l) {
        data.push_back(static_cast<float>(x + spec.noise * rng.normal()));
        data.push_back(static_cast<float>(y + spec.noise * rng.normal()));
        truth.push_back(l);
      };
      const double pi = std::numbers::pi;
      if (spec.shape == Shape::moons) {
        auto lin = [&](std::size_t i, std::size_t m) {
          return m > 1 ? pi * static_cast<double>(i) / static_cast<double>(m - 1) : 0.0;
        };
        for (std::size_t i = 0; i < n_out; ++i) emit(std::cos(lin(i, n_out)), std::sin(lin(i, n_out)), 0);
        for (std::size_t i = 0; i < n_in; ++i) {
          emit(1.0 - std::cos(lin(i, n_in)), 1.0 - std::sin(lin(i, n_in)) - 0.5, 1);
        }
      } else {
        for (std::size_t i = 0; i < n_out; ++i) {
          const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n_out);
          emit(std::cos(t), std::sin(t), 0);
        }
        for (std::size_t i = 0; i < n_in; ++i) {
          const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n_in);
          emit(spec.factor * std::cos(t), spec.factor * std::sin(t), 1);
        }
      }
      return {PointSet(spec.n, 2, std::move(data)), std::move(truth)};
    }
    case Shape::uniform_noise: {
      std::vector<float> data(spec.n * spec.dim);
      for (auto& v : data) v = static_cast<float>(rng.uniform());
      return {PointSet(spec.n, spec.dim, std::move(data)), std::vector<Label>(spec.n, 0)};
    }
  }
  throw ContractError("unknown shape");
}

inline nlohmann::ordered_json to_json(const SyntheticSpec& s) {
  nlohmann::ordered_json j;
  j["shape"] = std::string(to_string(s.shape));
  j["n"] = s.n;
  j["dim"] = (s.shape == Shape::moons || s.shape == Shape::circles) ? 2 : s.dim;
  j["noise"] = s.noise;
  j["seed"] = s.seed;
  j["centers"] = s.center_coords.empty() ? s.centers : s.center_coords.size();
  j["center_box"] = s.center_box;
  j["cluster_std"] = s.cluster_std;
  if (!s.stds.empty()) j["stds"] = s.stds;
  j["factor"] = s.factor;
  j["rng"] = std::string(Rng::kAlgorithm);
  return j;
}

// ---------------------------------------------------------------------------
// Benchmark manifest

struct BenchmarkEntry {
  std::string name;
  SyntheticSpec spec;
  std::size_t classes = 0;
  std::size_t min_cluster_size = 5;
};

/// 22 generated stand-ins for a real-world benchmark collection: sizes
/// 101..20000 (median 343), dims 2..262 (median 10), classes 2..116 (median 3).
inline std::vector<BenchmarkEntry> benchmark_manifest() {
  struct Row {
    std::size_t n, dim, classes;
    Shape shape;
  };
  static constexpr std::array<Row, 22> rows{{
      {101, 2, 2, Shape::moons},
      {120, 2, 2, Shape::circles},
      {150, 2, 3, Shape::anisotropic},
      {180, 3, 3, Shape::varied_variance},
      {210, 4, 2, Shape::blobs},
      {250, 5, 3, Shape::blobs},
      {280, 6, 2, Shape::varied_variance},
      {300, 8, 3, Shape::blobs},
      {320, 9, 4, Shape::anisotropic},
      {330, 10, 3, Shape::blobs},
      {340, 10, 2, Shape::varied_variance},
      {346, 10, 3, Shape::blobs},
      {360, 10, 4, Shape::varied_variance},
      {400, 12, 5, Shape::blobs},
      {500, 262, 3, Shape::blobs},
      {700, 16, 5, Shape::anisotropic},
      {1000, 20, 6, Shape::blobs},
      {1500, 24, 8, Shape::varied_variance},
      {2500, 128, 10, Shape::blobs},
      {5000, 40, 20, Shape::blobs},
      {10000, 64, 50, Shape::varied_variance},
      {20000, 32, 116, Shape::blobs},
  }};
  std::vector<BenchmarkEntry> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    BenchmarkEntry e;
    e.name = "bench" + std::to_string(i + 1) + "_" + std::string(to_string(r.shape)) + "_n" +
             std::to_string(r.n);
    e.spec.shape = r.shape;
    e.spec.n = r.n;
    e.spec.dim = r.dim;
    e.spec.centers = r.classes;
    e.spec.seed = 1000 + i;
    e.spec.noise = 0.05;
    e.classes = r.classes;
    e.min_cluster_size = std::clamp<std::size_t>(r.n / (r.classes * 4), 5, 50);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planted-fraud transaction stream

struct FraudStreamSpec {
  std::size_t snapshots = 4;
  std::size_t per_snapshot = 500;
  std::size_t blobs = 5;
  std::size_t planted_blob = 0;
  double planted_seed_rate = 0.8;  // fraction of planted members carrying a risk seed
  std::size_t dim = 6;             // embedding-like numeric features emb_0..
  double separation = 12.0;
  std::int64_t origin_ms = 1'600'000'000'000;
  std::int64_t snapshot_ms = 86'400'000;
  bool sessions = true;
  std::uint64_t seed = 7;
};

struct FraudStream {
  std::vector<TransactionRecord> records;  // ascending timestamps
  std::vector<bool> planted;               // generator truth per record
  std::vector<Label> blob;                 // generator blob per record
};

/// Well-separated behaviour blobs; one blob is the planted fraud ring.
///
/// Each blob has its own click-stream template. Planted members are seeded
/// confirmed_fraud at `planted_seed_rate`; other blobs carry no risk seeds.
inline FraudStream generate_fraud_stream(const FraudStreamSpec& spec) {
  if (spec.planted_blob >= spec.blobs) throw ContractError("planted blob out of range");
  Rng rng(spec.seed);
  std::vector<std::vector<double>> centers(spec.blobs, std::vector<double>(spec.dim, 0.0));
  for (std::size_t b = 0; b < spec.blobs; ++b) {
    // place blob b on its own axis pair so all centers are equidistant
    centers[b][b % spec.dim] += spec.separation * (b < spec.dim ? 1.0 : -1.0);
  }
  static constexpr std::array<std::string_view, 5> kPages{"view", "search", "cart", "signup",
                                                          "payment"};
  FraudStream out;
  struct Pending {
    TransactionRecord rec;
    bool planted;
    Label blob;
  };
  std::vector<Pending> all;
  std::size_t serial = 0;
  for (std::size_t s = 0; s < spec.snapshots; ++s) {
    for (std::size_t i = 0; i < spec.per_snapshot; ++i) {
      const auto b = static_cast<std::size_t>(rng.below(spec.blobs));
      const bool planted = b == spec.planted_blob;
      TransactionRecord r;
      r.id = "t" + std::to_string(serial++);
      r.timestamp = spec.origin_ms + static_cast<std::int64_t>(s) * spec.snapshot_ms +
                    static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(spec.snapshot_ms)));
      r.amount = std::round((planted ? rng.uniform(150.0, 600.0) : rng.uniform(10.0, 300.0)) * 100.0) /
                 100.0;
      if (planted) {
        r.risk_seed = rng.uniform() < spec.planted_seed_rate ? RiskSeed::confirmed_fraud
                                                             : RiskSeed::unknown;
      } else {
        r.risk_seed = rng.uniform() < 0.7 ? RiskSeed::legit : RiskSeed::unknown;
      }
      for (std::size_t j = 0; j < spec.dim; ++j) {
        r.features["emb_" + std::to_string(j)] = static_cast<float>(rng.normal(centers[b][j], 1.0));
      }
      if (spec.sessions) {
        ClickSession sess;
        if (planted) {
          // fast, targeted: two views straight to checkout, no search
          for (int v = 0; v < 2; ++v) {
            sess.events.push_back({"view", static_cast<std::int64_t>(500 + rng.below(500))});
          }
          sess.events.push_back({"checkout", static_cast<std::int64_t>(300 + rng.below(300))});
        } else {
          // each blob browses along its own fixed page template
          const auto len = 3 + b % 3;
          for (std::size_t e = 0; e < len; ++e) {
            sess.events.push_back({std::string(kPages[(b + e) % kPages.size()]),
                                   static_cast<std::int64_t>(2000 + rng.below(2000))});
          }
          sess.events.push_back({"checkout", static_cast<std::int64_t>(1000 + rng.below(1000))});
        }
        r.session = std::move(sess);
      }
      all.push_back({std::move(r), planted, static_cast<Label>(b)});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Pending& a, const Pending& b) {
    return a.rec.timestamp < b.rec.timestamp;
  });
  for (auto& p : all) {
    out.records.push_back(std::move(p.rec));
    out.planted.push_back(p.planted);
    out.blob.push_back(p.blob);
  }
  return out;
}

}  // namespace rc
