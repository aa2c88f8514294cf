#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace cubeclust {

using PointId = std::uint32_t;
inline constexpr PointId kNoPoint = 0xffffffffu;
inline constexpr std::int32_t kNoise = -1;

// Flat row-major point storage with stable 0-based ids.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;  // dim * count() doubles

  std::size_t count() const { return dim ? coords.size() / dim : 0; }
  const double* row(PointId id) const { return coords.data() + dim * id; }
  void add(const double* c) { coords.insert(coords.end(), c, c + dim); }
  void add(std::initializer_list<double> c) { coords.insert(coords.end(), c.begin(), c.end()); }
};

inline double dist2(const PointSet& ps, PointId a, PointId b) {
  const double* pa = ps.row(a);
  const double* pb = ps.row(b);
  double s = 0.0;
  for (std::size_t i = 0; i < ps.dim; ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return s;
}

inline double dist(const PointSet& ps, PointId a, PointId b) { return std::sqrt(dist2(ps, a, b)); }

// Cluster labels per point id; kNoise (-1) marks unclustered points.
struct Labeling {
  std::vector<std::int32_t> cluster;
  std::size_t size() const { return cluster.size(); }
};

// Renumber an arbitrary partition labeling (any non-negative token per cluster,
// negative = noise) so cluster ids are contiguous from 0 in order of the
// smallest member point id. Two labelings of the same partition canonicalize
// to identical vectors.
Labeling canonicalize_partition(const std::vector<std::int64_t>& raw);

// Coordinate-identical points collapsed to one representative per location.
// rep[g] is the smallest id in group g; group_of maps each raw id to its group.
struct DuplicateGroups {
  std::vector<PointId> rep;
  std::vector<std::uint32_t> mult;
  std::vector<std::uint32_t> group_of;
  bool trivial() const { return rep.size() == group_of.size(); }
};

DuplicateGroups merge_duplicates(const PointSet& ps);

}  // namespace cubeclust
