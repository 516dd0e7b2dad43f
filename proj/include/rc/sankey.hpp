#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rc/core.hpp"

namespace rc {

struct FlowEdge {
  std::string source;
  std::string target;
  std::size_t value = 0;

  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

/// Aggregated page-to-page transition counts over the sessions of one cluster.
/// Self-transitions (view -> view) are kept; sorted by value desc, then names.
inline std::vector<FlowEdge> page_flow(std::span<const TransactionRecord> records,
                                       std::span<const Label> labels, Label cluster) {
  if (records.size() != labels.size()) throw ContractError("records and labels differ in length");
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (labels[i] != cluster || !records[i].session) continue;
    const auto& ev = records[i].session->events;
    for (std::size_t j = 0; j + 1 < ev.size(); ++j) ++counts[{ev[j].page_type, ev[j + 1].page_type}];
  }
  std::vector<FlowEdge> flow;
  for (auto& [key, value] : counts) flow.push_back({key.first, key.second, value});
  std::stable_sort(flow.begin(), flow.end(),
                   [](const FlowEdge& a, const FlowEdge& b) { return a.value > b.value; });
  return flow;
}

inline nlohmann::ordered_json flow_json(const std::vector<FlowEdge>& flow, Label cluster) {
  nlohmann::ordered_json j;
  j["cluster"] = cluster;
  auto links = nlohmann::ordered_json::array();
  for (const auto& e : flow) {
    links.push_back({{"source", e.source}, {"target", e.target}, {"value", e.value}});
  }
  j["links"] = std::move(links);
  return j;
}

}  // namespace rc
