#pragma once

#include <cstdint>
#include <vector>

#include "cubeclust/graph.hpp"
#include "cubeclust/grid.hpp"
#include "cubeclust/points.hpp"

namespace cubeclust {

enum class CubeKind : std::uint8_t { Dense, Sparse, LocallyDense };

// Classification of one occupied cube with the occupancy counts that decide
// it. Counts are multiplicity-weighted when per-id weights are supplied.
// Dense: ring1 > k (every point in the cube is core). Sparse: ringm <= k
// (every point is noise). LocallyDense: everything else; per-point scans
// decide core status.
struct CubeCategory {
  CubeKind kind = CubeKind::Sparse;
  std::uint64_t in_cube = 0;  // points in the cube itself
  std::uint64_t ring1 = 0;    // points in the one-ring
  std::uint64_t ringm = 0;    // points in the m_const-ring
};

// Scan results for locally dense cubes. For each core p found in such a
// cube, `outer` holds every id within eps of p that lies outside the one-ring
// (the one-ring itself is within eps of p by grid geometry, so together they
// describe p's whole eps-ball). reach_cells lists every cell holding a point
// within eps of some core of the cube: occupied one-ring cells plus the cells
// of outer hits.
struct NeighborLists {
  struct CellScan {
    std::uint32_t cell = kNoCell;
    std::vector<PointId> ring1_ids;           // ascending, includes the cube's own points
    std::vector<PointId> cores;               // ascending
    std::vector<std::vector<PointId>> outer;  // aligned with cores, ascending
    std::vector<std::uint32_t> reach_cells;   // ascending cell indices
  };
  std::vector<CellScan> scans;                // ascending by cell
  std::vector<std::uint32_t> scan_of_cell;    // cell -> index into scans, kNoCell if none
};

// Graph on occupied-cube cell indices.
struct CubeGraph {
  std::vector<std::uint32_t> cells;                              // ascending
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;    // canonical (min, max), sorted, unique
};

// Point-pair distance evaluations per phase. Cube classification and graph
// assembly are arranged to need none; only the listed phases measure.
struct DistanceCounters {
  std::uint64_t core_scan = 0;
  std::uint64_t dense_merge = 0;
  std::uint64_t border = 0;
  std::uint64_t total() const { return core_scan + dense_merge + border; }
};

std::vector<CubeCategory> categorize_cubes(const CubeMap& map, std::uint64_t k,
                                           const std::vector<std::uint32_t>* mult, int workers);

NeighborLists local_core_scan(const PointSet& ps, const CubeMap& map,
                              const std::vector<CubeCategory>& cats, double eps, std::uint64_t k,
                              const std::vector<std::uint32_t>* mult, int workers,
                              std::vector<std::uint8_t>& is_core, std::uint64_t& distance_evals);

// Candidate cube graph: vertices are dense cubes and locally dense cubes
// holding at least one core. Edges join cubes that may share a cluster:
// (1) adjacent vertices, (2) mutually reaching locally dense cubes,
// (3) a locally dense cube reaching a dense one.
CubeGraph build_g1(const CubeMap& map, const std::vector<CubeCategory>& cats,
                   const NeighborLists& lists);

// Drop non-adjacent edges with no witnessed core-core contact within eps.
// Edges into dense cubes placed by rule (3) always carry a witness.
CubeGraph prune_to_g2(const CubeGraph& g1, const CubeMap& map,
                      const std::vector<CubeCategory>& cats, const NeighborLists& lists,
                      const std::vector<std::uint8_t>& is_core, int workers);

// Join dense cubes from different components that sit within the m_const-ring
// but outside the one-ring of each other, testing point pairs until one hit.
CubeGraph merge_dense(const CubeGraph& g2, const CubeMap& map, const PointSet& ps,
                      const std::vector<CubeCategory>& cats, double eps,
                      std::uint64_t& distance_evals);

struct DbscanOutput {
  Labeling labels;  // core clustering: every labeled point is core
  CubeMap map;
  std::vector<CubeCategory> categories;
  NeighborLists lists;
  std::vector<std::uint8_t> is_core;  // per global id
  DistanceCounters counters;
  std::size_t cluster_count = 0;
};

// Grid-based DBSCAN* over the whole point set or an id subset: clusters the
// core points exactly as the degree-filtered eps-distance graph would.
DbscanOutput s_dbscan_star(const PointSet& ps, double eps, int k, int workers,
                           const std::vector<PointId>* subset = nullptr,
                           const std::vector<std::uint32_t>* mult = nullptr);

// DBSCAN border step: attach each unlabeled point within eps of a cluster's
// core set to that cluster; ties go to the smallest cluster id. Distance
// tests run only between boundary-region dense-cube cores and nearby noise;
// everything else is read off stored neighbor lists.
Labeling assign_borders(const PointSet& ps, const DbscanOutput& out, double eps,
                        std::uint64_t& distance_evals);

// Reference implementations: direct double loops over point pairs, no grid.
std::vector<std::uint8_t> core_points_oracle(const PointSet& ps, double eps, std::uint64_t k,
                                             const std::vector<PointId>* subset = nullptr,
                                             const std::vector<std::uint32_t>* mult = nullptr);

Labeling dbscan_star_oracle(const PointSet& ps, double eps, std::uint64_t k,
                            std::size_t cap = 20000, const std::vector<PointId>* subset = nullptr,
                            const std::vector<std::uint32_t>* mult = nullptr);

Labeling dbscan_oracle(const PointSet& ps, double eps, std::uint64_t k, std::size_t cap = 20000);

}  // namespace cubeclust
