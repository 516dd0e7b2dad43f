#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rc {

inline constexpr std::string_view kVersion = "0.1.0";

/// Raised when a file cannot be opened, read, or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a caller violates an operation's preconditions.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using PointId = std::uint32_t;
using Label = std::int32_t;

inline constexpr Label kNoise = -1;

/// Dense row-major matrix of feature vectors, 32-bit storage.
///
/// Immutable after construction; every value is finite and the shape is at
/// least 1x1.
class PointSet {
 public:
  PointSet() = default;

  PointSet(std::size_t n, std::size_t dim, std::vector<float> data,
           std::vector<std::string> ids = {})
      : n_(n), dim_(dim), data_(std::move(data)), ids_(std::move(ids)) {
    if (n_ == 0 || dim_ == 0) {
      throw ContractError("PointSet requires n >= 1 and dim >= 1");
    }
    if (data_.size() != n_ * dim_) {
      throw ContractError("PointSet data length " + std::to_string(data_.size()) +
                          " != n*dim " + std::to_string(n_ * dim_));
    }
    if (!ids_.empty() && ids_.size() != n_) {
      throw ContractError("PointSet ids length does not match n");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw ContractError("PointSet value at row " + std::to_string(i / dim_) +
                            " is not finite");
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool empty() const noexcept { return n_ == 0; }

  [[nodiscard]] std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  [[nodiscard]] float at(std::size_t i, std::size_t j) const noexcept {
    return data_[i * dim_ + j];
  }
  [[nodiscard]] std::span<const float> data() const noexcept { return data_; }
  [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }

  /// Rows `indices` in the given order, carrying ids along when present.
  [[nodiscard]] PointSet subset(std::span<const std::size_t> indices) const {
    std::vector<float> out;
    out.reserve(indices.size() * dim_);
    std::vector<std::string> out_ids;
    for (auto i : indices) {
      auto r = row(i);
      out.insert(out.end(), r.begin(), r.end());
      if (!ids_.empty()) out_ids.push_back(ids_[i]);
    }
    return PointSet(indices.size(), dim_, std::move(out), std::move(out_ids));
  }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<std::string> ids_;
};

enum class RiskSeed { confirmed_fraud, declined, legit, unknown };

inline std::string_view to_string(RiskSeed seed) {
  switch (seed) {
    case RiskSeed::confirmed_fraud: return "confirmed_fraud";
    case RiskSeed::declined: return "declined";
    case RiskSeed::legit: return "legit";
    case RiskSeed::unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<RiskSeed> parse_risk_seed(std::string_view s) {
  if (s == "confirmed_fraud") return RiskSeed::confirmed_fraud;
  if (s == "declined") return RiskSeed::declined;
  if (s == "legit") return RiskSeed::legit;
  if (s == "unknown") return RiskSeed::unknown;
  return std::nullopt;
}

/// Confirmed fraud and processor declines both count as risk seeds.
inline bool is_risk_seed(RiskSeed seed) {
  return seed == RiskSeed::confirmed_fraud || seed == RiskSeed::declined;
}

struct PageEvent {
  std::string page_type;
  std::int64_t dwell_ms = 0;

  friend bool operator==(const PageEvent&, const PageEvent&) = default;
};

struct ClickSession {
  std::vector<PageEvent> events;

  void validate() const {
    if (events.empty()) throw ContractError("click session has no events");
    for (const auto& e : events) {
      if (e.dwell_ms < 0) throw ContractError("click session dwell_ms is negative");
    }
  }

  friend bool operator==(const ClickSession&, const ClickSession&) = default;
};

struct TransactionRecord {
  std::string id;
  std::int64_t timestamp = 0;  // epoch milliseconds
  double amount = 0.0;
  RiskSeed risk_seed = RiskSeed::unknown;
  std::map<std::string, double> features;
  std::optional<ClickSession> session;

  void validate() const {
    if (amount < 0.0 || !std::isfinite(amount)) {
      throw ContractError("transaction " + id + ": amount must be finite and >= 0");
    }
    if (timestamp <= 0) throw ContractError("transaction " + id + ": timestamp must be > 0");
    for (const auto& [name, value] : features) {
      if (!std::isfinite(value)) {
        throw ContractError("transaction " + id + ": feature " + name + " is not finite");
      }
    }
    if (session) session->validate();
  }

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

/// Per-point cluster labels (noise = -1) and membership strengths in [0, 1].
struct ClusterAssignment {
  std::vector<Label> labels;
  std::vector<double> strengths;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }

  [[nodiscard]] std::size_t num_clusters() const noexcept {
    Label top = kNoise;
    for (auto l : labels) top = std::max(top, l);
    return static_cast<std::size_t>(top + 1);
  }

  [[nodiscard]] std::size_t noise_count() const noexcept {
    std::size_t c = 0;
    for (auto l : labels) c += (l == kNoise);
    return c;
  }

  void validate() const {
    if (strengths.size() != labels.size()) {
      throw ContractError("assignment strengths/labels length mismatch");
    }
    const auto k = static_cast<Label>(num_clusters());
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto l = labels[i];
      if (l < kNoise || l >= k) throw ContractError("assignment label out of range");
      if (l == kNoise && strengths[i] != 0.0) {
        throw ContractError("noise point with nonzero strength");
      }
      if (strengths[i] < 0.0 || strengths[i] > 1.0) {
        throw ContractError("assignment strength outside [0, 1]");
      }
      if (l >= 0) seen[static_cast<std::size_t>(l)] = true;
    }
    for (bool s : seen) {
      if (!s) throw ContractError("assignment labels are not contiguous");
    }
  }

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

}  // namespace rc
