#pragma once

#include <span>
#include <vector>

namespace drcl {

inline constexpr int kUnassigned = -1;

/// Integer assignment per node. Retained labels are 0..k-1; kUnassigned
/// marks nodes dropped by a filter.
struct LabelVector {
  std::vector<int> labels;
  int k = 0;

  LabelVector() = default;
  LabelVector(std::vector<int> values, int count) : labels(std::move(values)), k(count) {}

  /// Wraps raw labels; k is one past the largest label seen.
  static LabelVector from_raw(std::vector<int> values);

  std::size_t size() const noexcept { return labels.size(); }
  int operator[](std::size_t i) const { return labels[i]; }
  std::span<const int> view() const noexcept { return labels; }
  bool fully_assigned() const noexcept;

  /// Renumbers the assigned labels to 0..k-1 in order of first appearance.
  LabelVector compacted() const;

  bool operator==(const LabelVector&) const = default;
};

}  // namespace drcl
