#include "drcl/warmstart/warmstart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drcl::warmstart {

void ProtoCommunities::validate(int n) const {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& group : groups) {
    if (group.empty()) throw ValidationError("proto-communities: empty group");
    for (int v : group) {
      if (v < 0 || v >= n) throw ValidationError("proto-communities: node index out of range");
      if (seen[v]) throw ValidationError("proto-communities: groups overlap");
      seen[v] = 1;
    }
  }
}

FilterResult size_filter(const LabelVector& labels) {
  if (!labels.fully_assigned() || labels.size() == 0) {
    throw ValidationError("size_filter: labels must be fully assigned");
  }
  const LabelVector compact = labels.compacted();
  const auto count = static_cast<std::size_t>(compact.k);

  FilterResult out;
  auto& st = out.stats;
  st.sizes.assign(count, 0);
  for (int v : compact.labels) ++st.sizes[v];
  const double c = static_cast<double>(count);
  st.mu = std::accumulate(st.sizes.begin(), st.sizes.end(), 0.0) / c;
  double var = 0.0;
  for (int s : st.sizes) var += (s - st.mu) * (s - st.mu);
  st.sigma = std::sqrt(var / c);
  st.threshold = st.mu + 0.5 * st.sigma;

  std::vector<char> keep(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    // Sizes are integers; the tolerance keeps |c| >= T exact when sigma = 0.
    keep[i] = static_cast<double>(st.sizes[i]) >= st.threshold - 1e-9;
  }
  if (std::none_of(keep.begin(), keep.end(), [](char k) { return k != 0; })) {
    const auto largest = std::max_element(st.sizes.begin(), st.sizes.end()) - st.sizes.begin();
    keep[static_cast<std::size_t>(largest)] = 1;
    out.warnings.push_back("size filter removed every community; kept the largest one");
  }

  std::vector<int> remap(count, kUnassigned);
  int k = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (keep[i]) remap[i] = k++;
  }
  std::vector<int> filtered(compact.size());
  for (std::size_t i = 0; i < compact.size(); ++i) filtered[i] = remap[compact[i]];
  out.labels = LabelVector(std::move(filtered), k);
  out.proto = proto_from_labels(out.labels, ProtoSource::Structural);
  return out;
}

ProtoCommunities proto_from_labels(const LabelVector& labels, ProtoSource source) {
  int k = labels.k;
  for (int v : labels.labels) k = std::max(k, v + 1);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) groups[labels[i]].push_back(static_cast<int>(i));
  }
  ProtoCommunities out;
  out.source = source;
  for (auto& g : groups) {
    if (!g.empty()) out.groups.push_back(std::move(g));
  }
  return out;
}

}  // namespace drcl::warmstart
