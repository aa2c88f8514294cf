#pragma once

#include <vector>

#include "cubeclust/grid.hpp"
#include "cubeclust/points.hpp"

namespace cubeclust {

// Occupied-cube view of a point subset A within a base cube map.
// A cube of A is interior when every cube in its one-ring is occupied by the
// base set and every point in that ring belongs to A; one empty or foreign
// ring cube makes it boundary. interior_cells and boundary_cells partition
// cells.
struct RegionView {
  const CubeMap* base = nullptr;
  std::vector<PointId> member_ids;            // sorted ascending
  std::vector<std::uint32_t> cells;           // occupied cubes of A, ascending cell index
  std::vector<std::uint32_t> interior_cells;  // ascending
  std::vector<std::uint32_t> boundary_cells;  // ascending
};

RegionView classify_cubes(std::vector<PointId> member_ids, const CubeMap& base);

enum class RegionPart { Interior, Boundary, Closure };

// A cube-region extension: the full lattice key set (occupied or not) plus
// the base-set ids found in its occupied cubes.
struct Extension {
  std::vector<CubeKey> keys;   // lexicographically sorted, unique
  std::vector<PointId> ids;    // ascending, unique
};

// N-ring extension of an explicit key set against a base map.
Extension extend_region(const std::vector<CubeKey>& keys, int n_ring, const CubeMap& base);

// N-ring extension of one part of a region. members_only keeps only ids in
// member_ids; otherwise all base ids in the extension are returned.
Extension restrict_region(const RegionView& view, RegionPart part, int n_ring, bool members_only);

}  // namespace cubeclust
