#include "cubeclust/dbscan.hpp"

#include <algorithm>
#include <numeric>

#include "cubeclust/detail/union_find.hpp"
#include "cubeclust/errors.hpp"
#include "cubeclust/parallel.hpp"
#include "cubeclust/region.hpp"

namespace cubeclust {

namespace {

std::uint64_t id_weight(const std::vector<std::uint32_t>* mult, PointId id) {
  return mult ? (*mult)[id] : 1u;
}

std::vector<std::uint64_t> cell_weights(const CubeMap& map, const std::vector<std::uint32_t>* mult) {
  std::vector<std::uint64_t> w(map.cube_count(), 0);
  for (std::size_t c = 0; c < map.cube_count(); ++c) {
    if (mult) {
      for (PointId id : map.cells[c]) w[c] += (*mult)[id];
    } else {
      w[c] = map.cells[c].size();
    }
  }
  return w;
}

bool contains_cell(const std::vector<std::uint32_t>& sorted, std::uint32_t c) {
  return std::binary_search(sorted.begin(), sorted.end(), c);
}

}  // namespace

std::vector<CubeCategory> categorize_cubes(const CubeMap& map, std::uint64_t k,
                                           const std::vector<std::uint32_t>* mult, int workers) {
  const auto cw = cell_weights(map, mult);
  std::vector<CubeCategory> cats(map.cube_count());
  parallel_items(map.cube_count(), workers, [&](std::size_t c) {
    CubeCategory cat;
    cat.in_cube = cw[c];
    for (const CubeKey& t : extension_keys(map.keys[c], 1)) {
      const std::uint32_t tc = map.cell_of_key(t);
      if (tc != kNoCell) cat.ring1 += cw[tc];
    }
    for (const CubeKey& t : extension_keys(map.keys[c], map.params.m_const)) {
      const std::uint32_t tc = map.cell_of_key(t);
      if (tc != kNoCell) cat.ringm += cw[tc];
    }
    if (cat.ringm <= k)
      cat.kind = CubeKind::Sparse;
    else if (cat.ring1 > k)
      cat.kind = CubeKind::Dense;
    else
      cat.kind = CubeKind::LocallyDense;
    cats[c] = cat;
  });
  return cats;
}

NeighborLists local_core_scan(const PointSet& ps, const CubeMap& map,
                              const std::vector<CubeCategory>& cats, double eps, std::uint64_t k,
                              const std::vector<std::uint32_t>* mult, int workers,
                              std::vector<std::uint8_t>& is_core, std::uint64_t& distance_evals) {
  const double eps2 = eps * eps;
  std::vector<std::uint32_t> ld_cells;
  for (std::uint32_t c = 0; c < map.cube_count(); ++c)
    if (cats[c].kind == CubeKind::LocallyDense) ld_cells.push_back(c);

  // Mark dense-cube members core up front; locally dense members are decided
  // below by scanning their eps-ball outside the one-ring.
  is_core.assign(ps.count(), 0);
  for (std::uint32_t c = 0; c < map.cube_count(); ++c)
    if (cats[c].kind == CubeKind::Dense)
      for (PointId id : map.cells[c]) is_core[id] = 1;

  const std::size_t chunk_cap = 64;
  const std::size_t nchunks = ld_cells.size() < chunk_cap ? ld_cells.size() : chunk_cap;
  std::vector<std::vector<NeighborLists::CellScan>> chunk_scans(nchunks ? nchunks : 1);
  std::vector<std::uint64_t> chunk_evals(nchunks ? nchunks : 1, 0);

  parallel_chunks(ld_cells.size(), workers, [&](std::size_t lo, std::size_t hi, std::size_t chunk) {
    for (std::size_t t = lo; t < hi; ++t) {
      const std::uint32_t c = ld_cells[t];
      NeighborLists::CellScan scan;
      scan.cell = c;

      std::vector<std::uint32_t> ring1_cells;
      std::uint64_t w1 = 0;
      for (const CubeKey& tk : extension_keys(map.keys[c], 1)) {
        const std::uint32_t tc = map.cell_of_key(tk);
        if (tc == kNoCell) continue;
        ring1_cells.push_back(tc);
        for (PointId id : map.cells[tc]) {
          scan.ring1_ids.push_back(id);
          w1 += id_weight(mult, id);
        }
      }
      std::sort(ring1_cells.begin(), ring1_cells.end());
      std::sort(scan.ring1_ids.begin(), scan.ring1_ids.end());

      std::vector<std::uint32_t> outer_cells;
      for (const CubeKey& tk : extension_keys(map.keys[c], map.params.m_const)) {
        if (chebyshev(map.keys[c], tk) <= 1) continue;
        const std::uint32_t tc = map.cell_of_key(tk);
        if (tc != kNoCell) outer_cells.push_back(tc);
      }
      std::sort(outer_cells.begin(), outer_cells.end());

      std::vector<std::uint32_t> hit_cells;
      for (PointId p : map.cells[c]) {
        // Core when the whole eps-ball outweighs k; the one-ring counts in
        // full because adjacent-cube points are within eps by grid geometry.
        std::uint64_t wball = w1;
        std::vector<PointId> hits;
        for (std::uint32_t tc : outer_cells) {
          for (PointId q : map.cells[tc]) {
            ++chunk_evals[chunk];
            if (dist2(ps, p, q) <= eps2) {
              hits.push_back(q);
              wball += id_weight(mult, q);
            }
          }
        }
        if (wball > k) {
          is_core[p] = 1;
          scan.cores.push_back(p);
          for (PointId q : hits) hit_cells.push_back(map.point_cell[q]);
          scan.outer.push_back(std::move(hits));
        }
      }
      if (!scan.cores.empty()) {
        scan.reach_cells = ring1_cells;
        scan.reach_cells.insert(scan.reach_cells.end(), hit_cells.begin(), hit_cells.end());
        std::sort(scan.reach_cells.begin(), scan.reach_cells.end());
        scan.reach_cells.erase(std::unique(scan.reach_cells.begin(), scan.reach_cells.end()),
                               scan.reach_cells.end());
      }
      chunk_scans[chunk].push_back(std::move(scan));
    }
  });

  NeighborLists lists;
  lists.scan_of_cell.assign(map.cube_count(), kNoCell);
  for (auto& cs : chunk_scans)
    for (auto& s : cs) {
      lists.scan_of_cell[s.cell] = static_cast<std::uint32_t>(lists.scans.size());
      lists.scans.push_back(std::move(s));
    }
  for (std::uint64_t e : chunk_evals) distance_evals += e;
  return lists;
}

CubeGraph build_g1(const CubeMap& map, const std::vector<CubeCategory>& cats,
                   const NeighborLists& lists) {
  CubeGraph g;
  std::vector<std::uint8_t> is_vertex(map.cube_count(), 0);
  for (std::uint32_t c = 0; c < map.cube_count(); ++c) {
    if (cats[c].kind == CubeKind::Dense) {
      is_vertex[c] = 1;
    } else if (cats[c].kind == CubeKind::LocallyDense) {
      const std::uint32_t s = lists.scan_of_cell[c];
      if (s != kNoCell && !lists.scans[s].cores.empty()) is_vertex[c] = 1;
    }
    if (is_vertex[c]) g.cells.push_back(c);
  }

  auto add_edge = [&](std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    g.edges.emplace_back(std::min(a, b), std::max(a, b));
  };

  for (std::uint32_t c : g.cells) {
    // (1) adjacency between candidate cubes.
    for (const CubeKey& tk : extension_keys(map.keys[c], 1)) {
      const std::uint32_t tc = map.cell_of_key(tk);
      if (tc != kNoCell && tc > c && is_vertex[tc]) add_edge(c, tc);
    }
    if (cats[c].kind != CubeKind::LocallyDense) continue;
    const std::uint32_t s = lists.scan_of_cell[c];
    if (s == kNoCell) continue;
    const auto& reach = lists.scans[s].reach_cells;
    for (std::uint32_t tc : reach) {
      if (!is_vertex[tc] || tc == c) continue;
      if (cats[tc].kind == CubeKind::Dense) {
        // (3) locally dense cube reaching a dense cube.
        add_edge(c, tc);
      } else if (tc > c) {
        // (2) mutual reach between locally dense cubes.
        const std::uint32_t st = lists.scan_of_cell[tc];
        if (st != kNoCell && contains_cell(lists.scans[st].reach_cells, c)) add_edge(c, tc);
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

CubeGraph prune_to_g2(const CubeGraph& g1, const CubeMap& map,
                      const std::vector<CubeCategory>& cats, const NeighborLists& lists,
                      const std::vector<std::uint8_t>& is_core, int workers) {
  // A non-adjacent edge survives only with a witnessed core pair within eps:
  // some stored eps-hit of a core on one side that is itself a core in the
  // cube on the other side. Adjacent cubes are within eps wholesale.
  auto witnessed_from = [&](std::uint32_t from, std::uint32_t to) {
    if (cats[from].kind != CubeKind::LocallyDense) return false;
    const std::uint32_t s = lists.scan_of_cell[from];
    if (s == kNoCell) return false;
    const auto& scan = lists.scans[s];
    for (const auto& hits : scan.outer)
      for (PointId q : hits)
        if (map.point_cell[q] == to && is_core[q]) return true;
    return false;
  };
  std::vector<std::uint8_t> keep(g1.edges.size(), 0);
  parallel_items(g1.edges.size(), workers, [&](std::size_t i) {
    const auto [a, b] = g1.edges[i];
    if (chebyshev(map.keys[a], map.keys[b]) <= 1) {
      keep[i] = 1;
      return;
    }
    keep[i] = witnessed_from(a, b) || witnessed_from(b, a) ? 1 : 0;
  });
  CubeGraph g2;
  g2.cells = g1.cells;
  for (std::size_t i = 0; i < g1.edges.size(); ++i)
    if (keep[i]) g2.edges.push_back(g1.edges[i]);
  return g2;
}

CubeGraph merge_dense(const CubeGraph& g2, const CubeMap& map, const PointSet& ps,
                      const std::vector<CubeCategory>& cats, double eps,
                      std::uint64_t& distance_evals) {
  const double eps2 = eps * eps;
  std::vector<std::uint32_t> cell_slot(map.cube_count(), kNoCell);
  for (std::uint32_t i = 0; i < g2.cells.size(); ++i) cell_slot[g2.cells[i]] = i;
  UnionFind uf(g2.cells.size());
  for (const auto& [a, b] : g2.edges) uf.unite(cell_slot[a], cell_slot[b]);

  CubeGraph g = g2;
  // Deterministic lexicographic sweep; components already joined are skipped,
  // so one hit per component pair is the worst case.
  for (std::uint32_t c : g.cells) {
    if (cats[c].kind != CubeKind::Dense) continue;
    for (const CubeKey& tk : extension_keys(map.keys[c], map.params.m_const)) {
      if (chebyshev(map.keys[c], tk) <= 1) continue;
      const std::uint32_t tc = map.cell_of_key(tk);
      if (tc == kNoCell || tc <= c || cats[tc].kind != CubeKind::Dense) continue;
      if (uf.same(cell_slot[c], cell_slot[tc])) continue;
      bool hit = false;
      for (PointId p : map.cells[c]) {
        for (PointId q : map.cells[tc]) {
          ++distance_evals;
          if (dist2(ps, p, q) <= eps2) {
            hit = true;
            break;
          }
        }
        if (hit) break;
      }
      if (hit) {
        uf.unite(cell_slot[c], cell_slot[tc]);
        g.edges.emplace_back(c, tc);
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

namespace {

// Core members of a candidate cube: every point of a dense cube, the scanned
// cores of a locally dense one.
const std::vector<PointId>* cube_cores(const CubeMap& map, const std::vector<CubeCategory>& cats,
                                       const NeighborLists& lists, std::uint32_t c,
                                       std::vector<PointId>& scratch) {
  if (cats[c].kind == CubeKind::Dense) return &map.cells[c];
  const std::uint32_t s = lists.scan_of_cell[c];
  if (s == kNoCell) {
    scratch.clear();
    return &scratch;
  }
  return &lists.scans[s].cores;
}

}  // namespace

DbscanOutput s_dbscan_star(const PointSet& ps, double eps, int k, int workers,
                           const std::vector<PointId>* subset,
                           const std::vector<std::uint32_t>* mult) {
  if (!(eps > 0.0)) fail_param("eps must be positive");
  if (k < 1) fail_param("k must be at least 1");
  if (workers < 1) fail_param("workers must be at least 1");
  DbscanOutput out;
  const GridParams params = derive_constants(ps.dim, eps);
  out.map = build_cube_map(ps, params, subset);
  out.categories = categorize_cubes(out.map, static_cast<std::uint64_t>(k), mult, workers);
  out.lists = local_core_scan(ps, out.map, out.categories, eps, static_cast<std::uint64_t>(k),
                              mult, workers, out.is_core, out.counters.core_scan);
  const CubeGraph g1 = build_g1(out.map, out.categories, out.lists);
  const CubeGraph g2 = prune_to_g2(g1, out.map, out.categories, out.lists, out.is_core, workers);
  const CubeGraph g = merge_dense(g2, out.map, ps, out.categories, eps, out.counters.dense_merge);

  std::vector<std::uint32_t> cell_slot(out.map.cube_count(), kNoCell);
  for (std::uint32_t i = 0; i < g.cells.size(); ++i) cell_slot[g.cells[i]] = i;
  UnionFind uf(g.cells.size());
  for (const auto& [a, b] : g.edges) uf.unite(cell_slot[a], cell_slot[b]);

  std::vector<std::int64_t> raw(ps.count(), -1);
  std::vector<PointId> scratch;
  for (std::uint32_t c : g.cells) {
    const auto* cores = cube_cores(out.map, out.categories, out.lists, c, scratch);
    const auto root = static_cast<std::int64_t>(uf.find(cell_slot[c]));
    for (PointId id : *cores) raw[id] = root;
  }
  out.labels = canonicalize_partition(raw);
  std::int32_t maxc = -1;
  for (std::int32_t l : out.labels.cluster) maxc = std::max(maxc, l);
  out.cluster_count = static_cast<std::size_t>(maxc + 1);
  return out;
}

Labeling assign_borders(const PointSet& ps, const DbscanOutput& out, double eps,
                        std::uint64_t& distance_evals) {
  const double eps2 = eps * eps;
  const CubeMap& map = out.map;
  Labeling labels = out.labels;

  // Cluster member lists in canonical (ascending) cluster order.
  std::int32_t nclusters = 0;
  for (std::int32_t l : labels.cluster) nclusters = std::max(nclusters, l + 1);
  std::vector<std::vector<PointId>> members(static_cast<std::size_t>(nclusters));
  for (PointId id = 0; id < labels.cluster.size(); ++id)
    if (labels.cluster[id] >= 0) members[static_cast<std::size_t>(labels.cluster[id])].push_back(id);

  auto unassigned = [&](PointId x) { return labels.cluster[x] == kNoise; };

  for (std::int32_t cl = 0; cl < nclusters; ++cl) {
    const auto& mem = members[static_cast<std::size_t>(cl)];
    // Cells of this cluster, ascending.
    std::vector<std::uint32_t> ccells;
    for (PointId id : mem) ccells.push_back(map.point_cell[id]);
    std::sort(ccells.begin(), ccells.end());
    ccells.erase(std::unique(ccells.begin(), ccells.end()), ccells.end());

    // Free attachments: every stored eps-hit of a locally dense core, and all
    // one-ring occupants of dense cubes, are within eps of a core by
    // construction. No distances are evaluated for them.
    for (std::uint32_t c : ccells) {
      if (out.categories[c].kind == CubeKind::Dense) {
        for (const CubeKey& tk : extension_keys(map.keys[c], 1)) {
          const std::uint32_t tc = map.cell_of_key(tk);
          if (tc == kNoCell) continue;
          for (PointId x : map.cells[tc])
            if (unassigned(x)) labels.cluster[x] = cl;
        }
      } else {
        const std::uint32_t s = out.lists.scan_of_cell[c];
        if (s == kNoCell) continue;
        const auto& scan = out.lists.scans[s];
        for (PointId x : scan.ring1_ids)
          if (unassigned(x)) labels.cluster[x] = cl;
        for (const auto& hits : scan.outer)
          for (PointId x : hits)
            if (unassigned(x)) labels.cluster[x] = cl;
      }
    }

    // Remaining candidates sit outside the one-ring of boundary-region dense
    // cubes; those pairs are the only measured ones.
    const RegionView view = classify_cubes(mem, map);
    std::vector<CubeKey> bkeys;
    for (std::uint32_t c : view.boundary_cells) bkeys.push_back(map.keys[c]);
    const Extension near_bd = extend_region(bkeys, map.params.n_const, map);
    std::vector<std::uint32_t> search_cells;
    for (const CubeKey& kk : near_bd.keys) {
      const std::uint32_t tc = map.cell_of_key(kk);
      if (tc == kNoCell || out.categories[tc].kind != CubeKind::Dense) continue;
      if (!contains_cell(view.cells, tc)) continue;  // dense cube of this cluster
      search_cells.push_back(tc);
    }
    std::sort(search_cells.begin(), search_cells.end());
    search_cells.erase(std::unique(search_cells.begin(), search_cells.end()), search_cells.end());

    for (std::uint32_t c : search_cells) {
      for (const CubeKey& tk : extension_keys(map.keys[c], map.params.m_const)) {
        if (chebyshev(map.keys[c], tk) <= 1) continue;  // one-ring already attached free
        const std::uint32_t tc = map.cell_of_key(tk);
        if (tc == kNoCell) continue;
        for (PointId x : map.cells[tc]) {
          if (!unassigned(x)) continue;
          for (PointId p : map.cells[c]) {
            ++distance_evals;
            if (dist2(ps, x, p) <= eps2) {
              labels.cluster[x] = cl;
              break;
            }
          }
        }
      }
    }
  }
  return labels;
}

std::vector<std::uint8_t> core_points_oracle(const PointSet& ps, double eps, std::uint64_t k,
                                             const std::vector<PointId>* subset,
                                             const std::vector<std::uint32_t>* mult) {
  const double eps2 = eps * eps;
  std::vector<PointId> ids;
  if (subset) {
    ids = *subset;
  } else {
    ids.resize(ps.count());
    std::iota(ids.begin(), ids.end(), PointId{0});
  }
  std::vector<std::uint8_t> core(ps.count(), 0);
  for (PointId p : ids) {
    std::uint64_t cnt = 0;
    for (PointId q : ids) {
      if (dist2(ps, p, q) <= eps2) cnt += id_weight(mult, q);
      if (cnt > k) break;
    }
    if (cnt > k) core[p] = 1;
  }
  return core;
}

Labeling dbscan_star_oracle(const PointSet& ps, double eps, std::uint64_t k, std::size_t cap,
                            const std::vector<PointId>* subset,
                            const std::vector<std::uint32_t>* mult) {
  if (!(eps > 0.0)) fail_param("eps must be positive");
  const double eps2 = eps * eps;
  std::vector<PointId> ids;
  if (subset) {
    ids = *subset;
  } else {
    ids.resize(ps.count());
    std::iota(ids.begin(), ids.end(), PointId{0});
  }
  if (ids.size() > cap)
    fail_param("refusing brute-force clustering of " + std::to_string(ids.size()) +
               " points (cap " + std::to_string(cap) + ")");
  const auto core = core_points_oracle(ps, eps, k, subset, mult);
  UnionFind uf(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!core[ids[i]]) continue;
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (!core[ids[j]]) continue;
      if (dist2(ps, ids[i], ids[j]) <= eps2) uf.unite(i, j);
    }
  }
  std::vector<std::int64_t> raw(ps.count(), -1);
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (core[ids[i]]) raw[ids[i]] = static_cast<std::int64_t>(uf.find(i));
  return canonicalize_partition(raw);
}

Labeling dbscan_oracle(const PointSet& ps, double eps, std::uint64_t k, std::size_t cap) {
  const double eps2 = eps * eps;
  Labeling labels = dbscan_star_oracle(ps, eps, k, cap);
  const auto core = core_points_oracle(ps, eps, k);
  for (PointId x = 0; x < labels.cluster.size(); ++x) {
    if (labels.cluster[x] != kNoise) continue;
    std::int32_t best = kNoise;
    for (PointId p = 0; p < labels.cluster.size(); ++p) {
      if (!core[p] || labels.cluster[p] < 0) continue;
      if (dist2(ps, x, p) <= eps2)
        best = best == kNoise ? labels.cluster[p] : std::min(best, labels.cluster[p]);
    }
    labels.cluster[x] = best;
  }
  return labels;
}

}  // namespace cubeclust
