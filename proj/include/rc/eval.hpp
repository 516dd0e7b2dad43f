#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rc/core.hpp"

namespace rc {

namespace detail {

inline std::uint64_t pairs(std::uint64_t x) noexcept { return x < 2 ? 0 : x * (x - 1) / 2; }

inline std::vector<std::uint32_t> dense_codes(std::span<const Label> labels) {
  std::vector<Label> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::uint32_t> codes(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    codes[i] = static_cast<std::uint32_t>(
        std::lower_bound(sorted.begin(), sorted.end(), labels[i]) - sorted.begin());
  }
  return codes;
}

}  // namespace detail

/// Adjusted Rand Index from exact pair counts.
///
/// Every label value, including -1, is an ordinary class here. Counts are
/// integers and the final ratio is formed from 128-bit numerator and
/// denominator, so hand cases come out exact.
inline double adjusted_rand_index(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw ContractError("ARI inputs differ in length");
  if (a.empty()) throw ContractError("ARI of empty labelings");
  const auto ca = detail::dense_codes(a);
  const auto cb = detail::dense_codes(b);
  const std::size_t n = a.size();

  std::vector<std::uint64_t> joint(n);
  for (std::size_t i = 0; i < n; ++i) joint[i] = (std::uint64_t{ca[i]} << 32) | cb[i];
  std::sort(joint.begin(), joint.end());
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && joint[j] == joint[i]) ++j;
    index += detail::pairs(j - i);
    i = j;
  }
  auto marginal = [&](const std::vector<std::uint32_t>& codes) {
    std::vector<std::uint64_t> counts(*std::max_element(codes.begin(), codes.end()) + 1, 0);
    for (auto c : codes) ++counts[c];
    std::uint64_t s = 0;
    for (auto c : counts) s += detail::pairs(c);
    return s;
  };
  const std::uint64_t sa = marginal(ca);
  const std::uint64_t sb = marginal(cb);
  const std::uint64_t total = detail::pairs(n);

  // ARI = (index - sa*sb/N) / ((sa+sb)/2 - sa*sb/N), scaled by 2N
  using i128 = __int128;
  const i128 num = 2 * static_cast<i128>(index) * total - 2 * static_cast<i128>(sa) * sb;
  const i128 den = (static_cast<i128>(sa) + sb) * total - 2 * static_cast<i128>(sa) * sb;
  if (den == 0) return 1.0;  // both trivial and identical: all singletons or one class
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

struct FraudReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double loss_saved = 0.0;
  double profit_hurt = 0.0;
  double return_rate = 0.0;
  double missed_fraud_amount = 0.0;
  double total_fraud_amount = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  bool precision_undefined = false;  // no predicted positives
  bool recall_undefined = false;     // no actual positives
  bool return_rate_infinite = false; // profit_hurt == 0
};

/// Loss saved / profit hurt; +inf when nothing legitimate was hurt.
inline double return_rate(double loss_saved, double profit_hurt) {
  if (profit_hurt <= 0.0) return std::numeric_limits<double>::infinity();
  return loss_saved / profit_hurt;
}

inline double f_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline FraudReport fraud_metrics(const std::vector<bool>& predicted_fraud,
                                 const std::vector<bool>& actual_fraud,
                                 std::span<const double> amounts) {
  if (predicted_fraud.size() != actual_fraud.size() || amounts.size() != actual_fraud.size()) {
    throw ContractError("fraud_metrics inputs are not aligned");
  }
  FraudReport r;
  for (std::size_t i = 0; i < amounts.size(); ++i) {
    if (amounts[i] < 0.0) throw ContractError("negative transaction amount");
    const bool p = predicted_fraud[i];
    const bool a = actual_fraud[i];
    if (a) r.total_fraud_amount += amounts[i];
    if (p && a) {
      ++r.true_positives;
      r.loss_saved += amounts[i];
    } else if (p) {
      ++r.false_positives;
      r.profit_hurt += amounts[i];
    } else if (a) {
      ++r.false_negatives;
      r.missed_fraud_amount += amounts[i];
    } else {
      ++r.true_negatives;
    }
  }
  const auto predicted = r.true_positives + r.false_positives;
  const auto actual = r.true_positives + r.false_negatives;
  r.precision_undefined = predicted == 0;
  r.recall_undefined = actual == 0;
  r.precision = predicted ? static_cast<double>(r.true_positives) / predicted : 0.0;
  r.recall = actual ? static_cast<double>(r.true_positives) / actual : 0.0;
  r.f_score = f_score(r.precision, r.recall);
  r.return_rate = return_rate(r.loss_saved, r.profit_hurt);
  r.return_rate_infinite = r.profit_hurt <= 0.0;
  return r;
}

inline nlohmann::ordered_json to_json(const FraudReport& r) {
  nlohmann::ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f_score"] = r.f_score;
  j["loss_saved"] = r.loss_saved;
  j["profit_hurt"] = r.profit_hurt;
  if (r.return_rate_infinite) {
    j["return_rate"] = nullptr;
  } else {
    j["return_rate"] = r.return_rate;
  }
  j["return_rate_infinite"] = r.return_rate_infinite;
  j["missed_fraud_amount"] = r.missed_fraud_amount;
  j["total_fraud_amount"] = r.total_fraud_amount;
  j["true_positives"] = r.true_positives;
  j["false_positives"] = r.false_positives;
  j["false_negatives"] = r.false_negatives;
  j["true_negatives"] = r.true_negatives;
  j["precision_undefined"] = r.precision_undefined;
  j["recall_undefined"] = r.recall_undefined;
  return j;
}

/// Aligned two-column text table.
inline std::string to_table(const FraudReport& r) {
  std::ostringstream os;
  auto row = [&](const std::string& name, const std::string& value) {
    os << std::left << std::setw(22) << name << std::right << std::setw(16) << value << '\n';
  };
  auto pct = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v * 100.0 << '%';
    return s.str();
  };
  auto money = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
  };
  row("precision", pct(r.precision) + (r.precision_undefined ? " (undef)" : ""));
  row("recall", pct(r.recall) + (r.recall_undefined ? " (undef)" : ""));
  row("f_score", pct(r.f_score));
  row("loss_saved", money(r.loss_saved));
  row("profit_hurt", money(r.profit_hurt));
  row("return_rate", r.return_rate_infinite ? std::string("inf") : money(r.return_rate));
  row("true_positives", std::to_string(r.true_positives));
  row("false_positives", std::to_string(r.false_positives));
  row("false_negatives", std::to_string(r.false_negatives));
  return os.str();
}

}  // namespace rc
