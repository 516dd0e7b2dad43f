#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rc/core.hpp"
#include "rc/io.hpp"
#include "rc/parallel.hpp"
#include "rc/random.hpp"

namespace rc {

/// Named, row-major real feature matrix used for rule learning.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::size_t rows = 0;
  std::vector<double> values;

  [[nodiscard]] std::size_t cols() const noexcept { return names.size(); }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const noexcept {
    return values[r * names.size() + c];
  }

  void validate() const {
    if (values.size() != rows * names.size()) throw ContractError("feature matrix shape mismatch");
  }
};

/// Reads a CSV whose first row holds feature names.
inline FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  FeatureMatrix fm;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    const auto cells = detail::split(view, ',');
    if (fm.names.empty()) {
      for (auto c : cells) fm.names.emplace_back(c);
      continue;
    }
    if (cells.size() != fm.names.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    for (auto c : cells) {
      double v = 0.0;
      if (!detail::parse_number(c, v) || !std::isfinite(v)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad value '" +
                      std::string(c) + "'");
      }
      fm.values.push_back(v);
    }
    ++fm.rows;
  }
  if (fm.names.empty() || fm.rows == 0) throw IoError(path.string() + ": no data rows");
  return fm;
}

enum class CompareOp { lt, le, gt, ge, eq };

inline std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
    case CompareOp::eq: return "=";
  }
  return "?";
}

struct Predicate {
  std::size_t feature = 0;
  std::string name;
  CompareOp op = CompareOp::le;
  double threshold = 0.0;

  [[nodiscard]] bool holds(double v) const noexcept {
    switch (op) {
      case CompareOp::lt: return v < threshold;
      case CompareOp::le: return v <= threshold;
      case CompareOp::gt: return v > threshold;
      case CompareOp::ge: return v >= threshold;
      case CompareOp::eq: return v == threshold;
    }
    return false;
  }

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Conjunction of threshold predicates with out-of-bag quality.
struct Rule {
  std::vector<Predicate> predicates;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t support = 0;  // rows covered in the full matrix

  [[nodiscard]] bool covers(const FeatureMatrix& fm, std::size_t row) const noexcept {
    for (const auto& p : predicates) {
      if (!p.holds(fm.at(row, p.feature))) return false;
    }
    return true;
  }

  [[nodiscard]] std::vector<std::size_t> covered_rows(const FeatureMatrix& fm) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < fm.rows; ++r) {
      if (covers(fm, r)) out.push_back(r);
    }
    return out;
  }

  /// Text form, e.g. "number_checkout_events > 10 and search_counts < 1".
  [[nodiscard]] std::string to_string() const {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < predicates.size(); ++i) {
      if (i) os << " and ";
      os << predicates[i].name << ' ' << rc::to_string(predicates[i].op) << ' '
         << predicates[i].threshold;
    }
    return os.str();
  }

  /// Exact identity key (thresholds at full precision).
  [[nodiscard]] std::string key() const {
    std::string k;
    for (const auto& p : predicates) {
      k += std::to_string(p.feature) + std::string(rc::to_string(p.op)) +
           detail::format_double(p.threshold) + ";";
    }
    return k;
  }
};

/// Tightest lower/upper bound per feature; nullopt when the bounds contradict.
inline std::optional<std::vector<Predicate>> normalize_predicates(std::vector<Predicate> preds) {
  std::map<std::size_t, std::vector<Predicate>> by_feature;
  for (auto& p : preds) by_feature[p.feature].push_back(std::move(p));
  std::vector<Predicate> out;
  for (auto& [feature, ps] : by_feature) {
    std::optional<Predicate> lower, upper, equal;
    for (auto& p : ps) {
      switch (p.op) {
        case CompareOp::gt:
        case CompareOp::ge:
          if (!lower || p.threshold > lower->threshold ||
              (p.threshold == lower->threshold && p.op == CompareOp::gt)) {
            lower = p;
          }
          break;
        case CompareOp::lt:
        case CompareOp::le:
          if (!upper || p.threshold < upper->threshold ||
              (p.threshold == upper->threshold && p.op == CompareOp::lt)) {
            upper = p;
          }
          break;
        case CompareOp::eq:
          if (equal && equal->threshold != p.threshold) return std::nullopt;
          equal = p;
          break;
      }
    }
    if (equal) {
      if ((lower && !lower->holds(equal->threshold)) || (upper && !upper->holds(equal->threshold))) {
        return std::nullopt;
      }
      out.push_back(*equal);
      continue;
    }
    if (lower && upper) {
      const bool strict = lower->op == CompareOp::gt || upper->op == CompareOp::lt;
      if (strict ? lower->threshold >= upper->threshold : lower->threshold > upper->threshold) {
        return std::nullopt;
      }
    }
    if (lower) out.push_back(*lower);
    if (upper) out.push_back(*upper);
  }
  return out;
}

struct ExplainConfig {
  std::size_t n_estimators = 10;       // trees per bootstrap round
  std::size_t max_depth = 4;
  double min_precision = 0.7;
  double min_recall = 0.1;
  std::size_t n_bootstrap_rounds = 5;  // each round draws a fresh negative batch
  double dedup_similarity = 0.9;       // Jaccard of covered rows
  double negative_ratio = 3.0;         // negatives per positive in a round
  std::uint64_t seed = 0;

  void validate() const {
    if (max_depth < 1) throw ContractError("max_depth must be >= 1");
    if (n_estimators < 1 || n_bootstrap_rounds < 1) {
      throw ContractError("n_estimators and n_bootstrap_rounds must be >= 1");
    }
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(min_precision) || !unit(min_recall) || !unit(dedup_similarity)) {
      throw ContractError("precision/recall/similarity thresholds must be in [0, 1]");
    }
    if (negative_ratio <= 0.0) throw ContractError("negative_ratio must be > 0");
  }
};

inline ExplainConfig explain_config_from_json(const nlohmann::json& j) {
  ExplainConfig c;
  auto opt = [&](const char* key, auto& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  opt("n_estimators", c.n_estimators);
  opt("max_depth", c.max_depth);
  opt("min_precision", c.min_precision);
  opt("min_recall", c.min_recall);
  opt("n_bootstrap_rounds", c.n_bootstrap_rounds);
  opt("dedup_similarity", c.dedup_similarity);
  opt("negative_ratio", c.negative_ratio);
  opt("seed", c.seed);
  c.validate();
  return c;
}

namespace detail {

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

inline double gini(double pos, double total) {
  if (total <= 0.0) return 0.0;
  const double p = pos / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

/// Best Gini split over all features; rows may repeat (bootstrap).
inline std::optional<Split> best_split(const FeatureMatrix& fm, const std::vector<bool>& y,
                                       const std::vector<std::size_t>& rows) {
  const double total = static_cast<double>(rows.size());
  double pos_total = 0.0;
  for (auto r : rows) pos_total += y[r];
  const double parent = gini(pos_total, total);
  std::optional<Split> best;
  std::vector<std::pair<double, bool>> col(rows.size());
  for (std::size_t f = 0; f < fm.cols(); ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = {fm.at(rows[i], f), y[rows[i]]};
    std::sort(col.begin(), col.end());
    double left_pos = 0.0;
    for (std::size_t i = 0; i + 1 < col.size(); ++i) {
      left_pos += col[i].second;
      if (col[i].first == col[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = total - nl;
      const double child = (nl * gini(left_pos, nl) + nr * gini(pos_total - left_pos, nr)) / total;
      const double gain = parent - child;
      if (gain > 1e-12 && (!best || gain > best->gain)) {
        best = Split{f, 0.5 * (col[i].first + col[i + 1].first), gain};
      }
    }
  }
  return best;
}

/// Depth-limited CART; every positive-majority leaf path becomes a candidate rule.
inline void grow_paths(const FeatureMatrix& fm, const std::vector<bool>& y,
                       const std::vector<std::size_t>& rows, std::size_t depth,
                       std::size_t max_depth, std::vector<Predicate>& path,
                       std::vector<std::vector<Predicate>>& out) {
  std::size_t pos = 0;
  for (auto r : rows) pos += y[r];
  const std::size_t neg = rows.size() - pos;
  std::optional<Split> split;
  if (depth < max_depth && pos > 0 && neg > 0) split = best_split(fm, y, rows);
  if (!split) {
    if (pos > neg && !path.empty()) out.push_back(path);
    return;
  }
  std::vector<std::size_t> left, right;
  for (auto r : rows) (fm.at(r, split->feature) <= split->threshold ? left : right).push_back(r);
  path.push_back({split->feature, fm.names[split->feature], CompareOp::le, split->threshold});
  grow_paths(fm, y, left, depth + 1, max_depth, path, out);
  path.back().op = CompareOp::gt;
  grow_paths(fm, y, right, depth + 1, max_depth, path, out);
  path.pop_back();
}

inline bool rule_quality_order(const Rule& a, const Rule& b) {
  if (a.precision != b.precision) return a.precision > b.precision;
  if (a.recall != b.recall) return a.recall > b.recall;
  if (a.support != b.support) return a.support > b.support;
  return a.to_string() < b.to_string();
}

inline double jaccard(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace detail

/// Jaccard similarity of two rules' covered-row sets on `fm`.
inline double rule_similarity(const Rule& a, const Rule& b, const FeatureMatrix& fm) {
  return detail::jaccard(a.covered_rows(fm), b.covered_rows(fm));
}

/// Greedy keep-best deduplication by covered-row Jaccard similarity.
inline std::vector<Rule> dedup_rules(std::vector<Rule> rules, const FeatureMatrix& fm,
                                     double similarity_threshold) {
  std::stable_sort(rules.begin(), rules.end(), detail::rule_quality_order);
  std::vector<Rule> kept;
  std::vector<std::vector<std::size_t>> kept_rows;
  for (auto& r : rules) {
    auto rows = r.covered_rows(fm);
    bool dup = false;
    for (const auto& k : kept_rows) {
      if (detail::jaccard(rows, k) > similarity_threshold) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    kept_rows.push_back(std::move(rows));
    kept.push_back(std::move(r));
  }
  return kept;
}

/// Bagged shallow trees -> conjunctive rules -> out-of-bag filter -> dedup.
///
/// Each round keeps every positive row and draws a fresh batch of negatives
/// (negative_ratio per positive). Each tree trains on a bootstrap resample of
/// the round's rows and its rules are scored on the rows it never saw.
inline std::vector<Rule> fit_rules(const FeatureMatrix& fm, const std::vector<bool>& target,
                                   const ExplainConfig& config) {
  config.validate();
  fm.validate();
  if (target.size() != fm.rows) throw ContractError("target length does not match feature rows");
  std::vector<std::size_t> positives, negatives;
  for (std::size_t r = 0; r < fm.rows; ++r) (target[r] ? positives : negatives).push_back(r);
  if (positives.empty() || negatives.empty()) {
    throw ContractError("fit_rules needs both positive and negative examples");
  }

  const std::size_t n_trees = config.n_bootstrap_rounds * config.n_estimators;
  std::vector<std::vector<Rule>> per_tree(n_trees);
  parallel_for(0, n_trees, [&](std::size_t t) {
    const std::size_t round = t / config.n_estimators;
    Rng round_rng(config.seed * 1000003ULL + round);
    std::vector<std::size_t> negs = negatives;
    const auto want = static_cast<std::size_t>(
        std::ceil(config.negative_ratio * static_cast<double>(positives.size())));
    if (want < negs.size()) {
      for (std::size_t i = 0; i < want; ++i) {
        std::swap(negs[i], negs[i + round_rng.below(negs.size() - i)]);
      }
      negs.resize(want);
    }
    std::vector<std::size_t> pool = positives;
    pool.insert(pool.end(), negs.begin(), negs.end());

    Rng rng(config.seed * 7919ULL + 0x5bd1e995ULL * (t + 1));
    std::vector<std::size_t> sample(pool.size());
    std::vector<bool> in_bag(fm.rows, false);
    for (auto& s : sample) {
      s = pool[rng.below(pool.size())];
      in_bag[s] = true;
    }
    std::vector<std::vector<Predicate>> paths;
    std::vector<Predicate> path;
    detail::grow_paths(fm, target, sample, 0, config.max_depth, path, paths);

    std::size_t oob_pos = 0;
    for (std::size_t r = 0; r < fm.rows; ++r) oob_pos += !in_bag[r] && target[r];
    for (auto& p : paths) {
      auto norm = normalize_predicates(std::move(p));
      if (!norm) continue;
      Rule rule{std::move(*norm), 0.0, 0.0, 0};
      std::size_t covered = 0, tp = 0;
      for (std::size_t r = 0; r < fm.rows; ++r) {
        if (in_bag[r] || !rule.covers(fm, r)) continue;
        ++covered;
        tp += target[r];
      }
      rule.precision = covered ? static_cast<double>(tp) / covered : 0.0;
      rule.recall = oob_pos ? static_cast<double>(tp) / oob_pos : 0.0;
      if (rule.precision >= config.min_precision && rule.recall >= config.min_recall) {
        per_tree[t].push_back(std::move(rule));
      }
    }
  }, 1);

  // identical rules from several trees: average their out-of-bag scores
  std::map<std::string, std::pair<Rule, std::size_t>> merged;
  for (auto& rules : per_tree) {
    for (auto& r : rules) {
      auto [it, inserted] = merged.try_emplace(r.key(), r, 0);
      if (!inserted) {
        it->second.first.precision += r.precision;
        it->second.first.recall += r.recall;
      }
      ++it->second.second;
    }
  }
  std::vector<Rule> rules;
  for (auto& [key, entry] : merged) {
    auto& [rule, count] = entry;
    rule.precision /= static_cast<double>(count);
    rule.recall /= static_cast<double>(count);
    rule.support = rule.covered_rows(fm).size();
    rules.push_back(std::move(rule));
  }
  return dedup_rules(std::move(rules), fm, config.dedup_similarity);
}

inline nlohmann::ordered_json to_json(const Rule& r) {
  nlohmann::ordered_json j;
  auto preds = nlohmann::ordered_json::array();
  for (const auto& p : r.predicates) {
    preds.push_back({{"feature", p.name}, {"op", std::string(to_string(p.op))}, {"threshold", p.threshold}});
  }
  j["predicates"] = std::move(preds);
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["support"] = r.support;
  j["text"] = r.to_string();
  return j;
}

}  // namespace rc
