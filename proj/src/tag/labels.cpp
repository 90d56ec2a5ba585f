#include "drcl/labels.hpp"

#include <algorithm>
#include <unordered_map>

namespace drcl {

LabelVector LabelVector::from_raw(std::vector<int> values) {
  int k = 0;
  for (int v : values) k = std::max(k, v + 1);
  return {std::move(values), k};
}

bool LabelVector::fully_assigned() const noexcept {
  return std::none_of(labels.begin(), labels.end(), [](int v) { return v < 0; });
}

LabelVector LabelVector::compacted() const {
  std::unordered_map<int, int> remap;
  std::vector<int> out(labels.size(), kUnassigned);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return {std::move(out), static_cast<int>(remap.size())};
}

}  // namespace drcl
