#include "cubeclust/points.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <numeric>

namespace cubeclust {

Labeling canonicalize_partition(const std::vector<std::int64_t>& raw) {
  Labeling out;
  out.cluster.assign(raw.size(), kNoise);
  // First appearance order equals smallest-member order because ids ascend.
  std::map<std::int64_t, std::int32_t> remap;
  std::int32_t next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0) continue;
    auto it = remap.find(raw[i]);
    if (it == remap.end()) it = remap.emplace(raw[i], next++).first;
    out.cluster[i] = it->second;
  }
  return out;
}

DuplicateGroups merge_duplicates(const PointSet& ps) {
  const std::size_t n = ps.count();
  std::vector<PointId> order(n);
  std::iota(order.begin(), order.end(), PointId{0});
  const std::size_t d = ps.dim;
  auto lex_less = [&](PointId a, PointId b) {
    const double* pa = ps.row(a);
    const double* pb = ps.row(b);
    for (std::size_t i = 0; i < d; ++i) {
      if (pa[i] < pb[i]) return true;
      if (pa[i] > pb[i]) return false;
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), lex_less);

  auto same_pos = [&](PointId a, PointId b) {
    const double* pa = ps.row(a);
    const double* pb = ps.row(b);
    for (std::size_t i = 0; i < d; ++i)
      if (pa[i] != pb[i]) return false;  // value equality: -0.0 == 0.0 by design
    return true;
  };

  DuplicateGroups g;
  g.group_of.assign(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    PointId smallest = order[i];
    while (j + 1 < n && same_pos(order[j + 1], order[i])) {
      ++j;
      smallest = std::min(smallest, order[j]);
    }
    const auto gi = static_cast<std::uint32_t>(g.rep.size());
    g.rep.push_back(smallest);
    g.mult.push_back(static_cast<std::uint32_t>(j - i + 1));
    for (std::size_t t = i; t <= j; ++t) g.group_of[order[t]] = gi;
    i = j + 1;
  }
  // Re-sort groups by representative id so downstream id order is stable.
  std::vector<std::uint32_t> perm(g.rep.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::sort(perm.begin(), perm.end(),
            [&](std::uint32_t a, std::uint32_t b) { return g.rep[a] < g.rep[b]; });
  DuplicateGroups out;
  out.rep.resize(g.rep.size());
  out.mult.resize(g.rep.size());
  out.group_of.assign(n, 0);
  std::vector<std::uint32_t> inv(perm.size());
  for (std::uint32_t t = 0; t < perm.size(); ++t) inv[perm[t]] = t;
  for (std::uint32_t t = 0; t < perm.size(); ++t) {
    out.rep[t] = g.rep[perm[t]];
    out.mult[t] = g.mult[perm[t]];
  }
  for (std::size_t r = 0; r < n; ++r) out.group_of[r] = inv[g.group_of[r]];
  return out;
}

}  // namespace cubeclust
