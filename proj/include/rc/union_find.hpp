#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

namespace rc {

/// Disjoint-set forest with path compression and union by rank.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  [[nodiscard]] std::size_t size() const noexcept { return parent_.size(); }
  [[nodiscard]] std::size_t component_count() const noexcept { return components_; }

  /// Iterative two-pass find; never recurses.
  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const auto next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  /// Returns false when a and b were already in one set.
  bool unite(std::uint32_t a, std::uint32_t b) {
    auto ra = find(a);
    auto rb = find(b);
    if (ra == rb) return false;
    if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    if (rank_[ra] == rank_[rb]) ++rank_[ra];
    --components_;
    return true;
  }

  bool connected(std::uint32_t a, std::uint32_t b) { return find(a) == find(b); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::size_t components_;
};

}  // namespace rc
