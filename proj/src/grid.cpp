#include "cubeclust/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cubeclust/errors.hpp"

namespace cubeclust {

GridParams derive_constants(std::size_t n, double eps) {
  if (n < 2 || n > kMaxDim) fail_param("invalid dimension: need 2 <= n <= " + std::to_string(kMaxDim));
  if (!(eps > 0.0) || !std::isfinite(eps)) fail_param("eps must be a positive finite number");
  GridParams g;
  g.n = n;
  g.eps = eps;
  g.side = eps / (2.0 * std::sqrt(static_cast<double>(n)));
  // Integer-exact ceilings: m >= 2*sqrt(n) iff m*m >= 4n, and
  // t >= sqrt(n) - 1 iff (t+1)^2 >= n, both for non-negative integers.
  int m = 1;
  while (static_cast<std::int64_t>(m) * m < static_cast<std::int64_t>(4 * n)) ++m;
  g.m_const = m;
  int t = 0;
  while (static_cast<std::int64_t>(t + 1) * (t + 1) < static_cast<std::int64_t>(n)) ++t;
  g.n_const = t < 1 ? 1 : t;
  g.N_const = g.m_const + g.n_const;
  return g;
}

CubeKey cube_key(const double* p, const GridParams& params) {
  CubeKey k;
  k.n = static_cast<std::uint8_t>(params.n);
  constexpr double kIndexLimit = 4611686018427387904.0;  // 2^62
  for (std::size_t i = 0; i < params.n; ++i) {
    if (!std::isfinite(p[i])) fail_param("invalid point: non-finite coordinate");
    const double q = std::floor(p[i] / params.side);
    if (!(q > -kIndexLimit && q < kIndexLimit))
      fail_param("invalid point: coordinate exceeds grid index range");
    k.j[i] = static_cast<std::int64_t>(q);
  }
  return k;
}

std::int64_t chebyshev(const CubeKey& a, const CubeKey& b) {
  std::int64_t m = 0;
  for (std::uint8_t i = 0; i < a.n; ++i) {
    const std::int64_t d = a.j[i] > b.j[i] ? a.j[i] - b.j[i] : b.j[i] - a.j[i];
    if (d > m) m = d;
  }
  return m;
}

std::vector<CubeKey> extension_keys(const CubeKey& s, int m) {
  const std::uint8_t n = s.n;
  const std::int64_t span = 2 * static_cast<std::int64_t>(m) + 1;
  std::size_t total = 1;
  for (std::uint8_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(span);
  std::vector<CubeKey> out;
  out.reserve(total);
  CubeKey cur = s;
  std::array<std::int64_t, kMaxDim> off{};
  for (std::uint8_t i = 0; i < n; ++i) {
    off[i] = -m;
    cur.j[i] = s.j[i] - m;
  }
  // Odometer over offsets, last axis fastest: emits keys in lexicographic order.
  for (;;) {
    out.push_back(cur);
    int i = n - 1;
    while (i >= 0 && off[i] == m) {
      off[i] = -m;
      cur.j[i] = s.j[i] - m;
      --i;
    }
    if (i < 0) break;
    ++off[i];
    ++cur.j[i];
  }
  return out;
}

CubeMap build_cube_map(const PointSet& ps, const GridParams& params,
                       const std::vector<PointId>* subset) {
  if (ps.dim != params.n) fail_param("point dimension does not match grid dimension");
  CubeMap map;
  map.params = params;
  std::vector<PointId> ids;
  if (subset) {
    ids = *subset;
  } else {
    ids.resize(ps.count());
    std::iota(ids.begin(), ids.end(), PointId{0});
  }
  std::vector<std::pair<CubeKey, PointId>> tagged;
  tagged.reserve(ids.size());
  for (PointId id : ids) tagged.emplace_back(cube_key(ps.row(id), params), id);
  std::sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) {
    if (a.first < b.first) return true;
    if (b.first < a.first) return false;
    return a.second < b.second;
  });
  map.point_cell.assign(ps.count(), kNoCell);
  std::size_t i = 0;
  while (i < tagged.size()) {
    std::size_t j = i;
    while (j + 1 < tagged.size() && tagged[j + 1].first == tagged[i].first) ++j;
    const auto cell = static_cast<std::uint32_t>(map.keys.size());
    map.keys.push_back(tagged[i].first);
    auto& members = map.cells.emplace_back();
    members.reserve(j - i + 1);
    for (std::size_t t = i; t <= j; ++t) {
      members.push_back(tagged[t].second);
      map.point_cell[tagged[t].second] = cell;
    }
    i = j + 1;
  }
  map.index.reserve(map.keys.size() * 2);
  for (std::uint32_t c = 0; c < map.keys.size(); ++c) map.index.emplace(map.keys[c], c);
  return map;
}

}  // namespace cubeclust
