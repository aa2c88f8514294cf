#include "cubeclust/region.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "cubeclust/errors.hpp"

namespace cubeclust {

RegionView classify_cubes(std::vector<PointId> member_ids, const CubeMap& base) {
  RegionView v;
  v.base = &base;
  std::sort(member_ids.begin(), member_ids.end());
  member_ids.erase(std::unique(member_ids.begin(), member_ids.end()), member_ids.end());
  v.member_ids = std::move(member_ids);

  // Count members per occupied cube; only cells fully covered by A can
  // certify an interior neighborhood.
  std::unordered_map<std::uint32_t, std::uint32_t> a_count;
  a_count.reserve(v.member_ids.size() * 2);
  for (PointId id : v.member_ids) {
    const std::uint32_t c = base.point_cell[id];
    if (c == kNoCell) fail_param("region member not present in base cube map");
    ++a_count[c];
  }
  v.cells.reserve(a_count.size());
  for (const auto& [c, cnt] : a_count) {
    (void)cnt;
    v.cells.push_back(c);
  }
  std::sort(v.cells.begin(), v.cells.end());

  auto fully_inside = [&](std::uint32_t c) {
    auto it = a_count.find(c);
    return it != a_count.end() && it->second == base.cells[c].size();
  };
  for (std::uint32_t c : v.cells) {
    bool interior = true;
    for (const CubeKey& t : extension_keys(base.keys[c], 1)) {
      const std::uint32_t tc = base.cell_of_key(t);
      if (tc == kNoCell || !fully_inside(tc)) {
        interior = false;
        break;
      }
    }
    (interior ? v.interior_cells : v.boundary_cells).push_back(c);
  }
  return v;
}

Extension extend_region(const std::vector<CubeKey>& keys, int n_ring, const CubeMap& base) {
  Extension ext;
  std::unordered_set<CubeKey, CubeKeyHash> seen;
  seen.reserve(keys.size() * 8);
  std::vector<std::uint32_t> hit_cells;
  for (const CubeKey& s : keys) {
    for (const CubeKey& t : extension_keys(s, n_ring)) {
      if (!seen.insert(t).second) continue;
      ext.keys.push_back(t);
      const std::uint32_t tc = base.cell_of_key(t);
      if (tc != kNoCell) hit_cells.push_back(tc);
    }
  }
  std::sort(ext.keys.begin(), ext.keys.end());
  std::sort(hit_cells.begin(), hit_cells.end());
  for (std::uint32_t tc : hit_cells)
    for (PointId id : base.cells[tc]) ext.ids.push_back(id);
  std::sort(ext.ids.begin(), ext.ids.end());
  return ext;
}

Extension restrict_region(const RegionView& view, RegionPart part, int n_ring, bool members_only) {
  const std::vector<std::uint32_t>* cells = nullptr;
  switch (part) {
    case RegionPart::Interior: cells = &view.interior_cells; break;
    case RegionPart::Boundary: cells = &view.boundary_cells; break;
    case RegionPart::Closure: cells = &view.cells; break;
  }
  std::vector<CubeKey> keys;
  keys.reserve(cells->size());
  for (std::uint32_t c : *cells) keys.push_back(view.base->keys[c]);
  Extension ext = extend_region(keys, n_ring, *view.base);
  if (members_only) {
    std::vector<PointId> kept;
    kept.reserve(ext.ids.size());
    std::set_intersection(ext.ids.begin(), ext.ids.end(), view.member_ids.begin(),
                          view.member_ids.end(), std::back_inserter(kept));
    ext.ids = std::move(kept);
  }
  return ext;
}

}  // namespace cubeclust
