#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "cubeclust/points.hpp"

namespace cubeclust {

inline constexpr std::size_t kMaxDim = 6;
inline constexpr std::uint32_t kNoCell = 0xffffffffu;

// Integer lattice coordinates of a half-open grid cube
// [j*side, (j+1)*side) per axis.
struct CubeKey {
  std::array<std::int64_t, kMaxDim> j{};
  std::uint8_t n = 0;

  bool operator==(const CubeKey& o) const {
    if (n != o.n) return false;
    for (std::uint8_t i = 0; i < n; ++i)
      if (j[i] != o.j[i]) return false;
    return true;
  }
  bool operator!=(const CubeKey& o) const { return !(*this == o); }
  bool operator<(const CubeKey& o) const {
    for (std::uint8_t i = 0; i < n; ++i) {
      if (j[i] < o.j[i]) return true;
      if (j[i] > o.j[i]) return false;
    }
    return false;
  }
};

struct CubeKeyHash {
  std::size_t operator()(const CubeKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint8_t i = 0; i < k.n; ++i) {
      std::uint64_t v = static_cast<std::uint64_t>(k.j[i]);
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return static_cast<std::size_t>(h);
  }
};

// Grid geometry for a given dimension and radius. side * 2 * sqrt(n) == eps,
// so the diagonal of each cube is eps/2: any two points in adjacent cubes are
// within eps, and the eps-ball around a cube is covered by m_const rings.
struct GridParams {
  std::size_t n = 0;     // dimension
  double eps = 0.0;      // ball radius
  double side = 0.0;     // cube side length, eps / (2*sqrt(n))
  int m_const = 0;       // smallest integer >= 2*sqrt(n)
  int n_const = 0;       // smallest integer >= sqrt(n) - 1, at least 1
  int N_const = 0;       // m_const + n_const
};

GridParams derive_constants(std::size_t n, double eps);

CubeKey cube_key(const double* p, const GridParams& params);

// Chebyshev distance between keys in index space.
std::int64_t chebyshev(const CubeKey& a, const CubeKey& b);

// True iff T lies in the one-ring of S (includes S == T).
inline bool adjacent(const CubeKey& s, const CubeKey& t) { return chebyshev(s, t) <= 1; }

// All (2m+1)^n lattice keys with Chebyshev distance <= m from s, in
// lexicographic order.
std::vector<CubeKey> extension_keys(const CubeKey& s, int m);

// Occupied cubes of a point set (or an id subset), with deterministic cell
// order: keys lexicographically sorted, ids ascending within each cell.
struct CubeMap {
  GridParams params;
  std::vector<CubeKey> keys;
  std::vector<std::vector<PointId>> cells;
  std::vector<std::uint32_t> point_cell;  // global id -> cell index, kNoCell if absent
  std::unordered_map<CubeKey, std::uint32_t, CubeKeyHash> index;

  std::uint32_t cell_of_key(const CubeKey& k) const {
    auto it = index.find(k);
    return it == index.end() ? kNoCell : it->second;
  }
  std::size_t cube_count() const { return keys.size(); }
};

CubeMap build_cube_map(const PointSet& ps, const GridParams& params,
                       const std::vector<PointId>* subset = nullptr);

}  // namespace cubeclust
