#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rc/core.hpp"

namespace rc {

/// Page-type vocabulary for per-type counts; anything else counts as "other".
inline constexpr std::array<std::string_view, 7> kPageTypes{
    "view", "search", "cart", "checkout", "signup", "payment", "other"};

/// Handcrafted click-stream statistics. Column order is fixed by
/// session_feature_names(). No feature depends on event order.
struct SessionFeatures {
  std::array<double, kPageTypes.size()> counts{};
  double total_events = 0;
  double distinct_page_types = 0;
  double dwell_total_ms = 0;
  double dwell_mean_ms = 0;
  double dwell_max_ms = 0;
  double dwell_min_ms = 0;
  double dwell_var_ms2 = 0;        // population variance
  double session_duration_ms = 0;  // sum of dwell; events carry no wall-clock gaps
  double checkout_to_view_ratio = 0;
  double search_counts = 0;

  [[nodiscard]] double count(std::string_view page) const {
    for (std::size_t i = 0; i < kPageTypes.size(); ++i) {
      if (kPageTypes[i] == page) return counts[i];
    }
    return 0.0;
  }

  [[nodiscard]] std::vector<double> values() const {
    std::vector<double> v(counts.begin(), counts.end());
    v.insert(v.end(), {total_events, distinct_page_types, dwell_total_ms, dwell_mean_ms,
                       dwell_max_ms, dwell_min_ms, dwell_var_ms2, session_duration_ms,
                       checkout_to_view_ratio, search_counts});
    return v;
  }
};

inline std::vector<std::string> session_feature_names() {
  std::vector<std::string> names;
  for (auto p : kPageTypes) names.push_back("number_" + std::string(p) + "_events");
  names.insert(names.end(), {"total_events", "distinct_page_types", "dwell_total_ms",
                             "dwell_mean_ms", "dwell_max_ms", "dwell_min_ms", "dwell_var_ms2",
                             "session_duration_ms", "checkout_to_view_ratio", "search_counts"});
  return names;
}

inline std::size_t page_type_index(std::string_view page) {
  for (std::size_t i = 0; i + 1 < kPageTypes.size(); ++i) {
    if (kPageTypes[i] == page) return i;
  }
  return kPageTypes.size() - 1;
}

inline SessionFeatures extract_session_features(const ClickSession& session) {
  if (session.events.empty()) throw ContractError("cannot extract features from an empty session");
  SessionFeatures f;
  std::set<std::string_view> distinct;
  double min_dwell = static_cast<double>(session.events.front().dwell_ms);
  double max_dwell = min_dwell;
  for (const auto& e : session.events) {
    if (e.dwell_ms < 0) throw ContractError("negative dwell_ms");
    f.counts[page_type_index(e.page_type)] += 1.0;
    distinct.insert(e.page_type);
    const auto d = static_cast<double>(e.dwell_ms);
    f.dwell_total_ms += d;
    min_dwell = std::min(min_dwell, d);
    max_dwell = std::max(max_dwell, d);
  }
  const auto n = static_cast<double>(session.events.size());
  f.total_events = n;
  f.distinct_page_types = static_cast<double>(distinct.size());
  f.dwell_mean_ms = f.dwell_total_ms / n;
  f.dwell_min_ms = min_dwell;
  f.dwell_max_ms = max_dwell;
  double ss = 0.0;
  for (const auto& e : session.events) {
    const double dev = static_cast<double>(e.dwell_ms) - f.dwell_mean_ms;
    ss += dev * dev;
  }
  f.dwell_var_ms2 = ss / n;
  f.session_duration_ms = f.dwell_total_ms;
  f.checkout_to_view_ratio = f.count("checkout") / std::max(1.0, f.count("view"));
  f.search_counts = f.count("search");
  return f;
}

}  // namespace rc
