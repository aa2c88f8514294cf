#include "cubeclust/staged.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "cubeclust/detail/union_find.hpp"
#include "cubeclust/errors.hpp"
#include "cubeclust/parallel.hpp"
#include "cubeclust/region.hpp"

namespace cubeclust {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max3(double a, double b, double c) { return std::max(a, std::max(b, c)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Visits every lattice key at Chebyshev distance exactly r from pk, r >= 1.
// Keys are grouped by the first axis pinned at +-r; earlier axes stay inside
// (-r, r) and later axes inside [-r, r], so every key appears exactly once.
template <typename Fn>
void for_each_shell_key(const CubeKey& pk, std::int64_t r, Fn&& fn) {
  const std::size_t n = pk.n;
  CubeKey t = pk;
  for (std::size_t f = 0; f < n; ++f) {
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      std::array<std::int64_t, kMaxDim> off{};
      for (std::size_t i = 0; i < n; ++i) off[i] = i < f ? -(r - 1) : -r;
      off[f] = sgn > 0 ? r : -r;
      while (true) {
        for (std::size_t i = 0; i < n; ++i) t.j[i] = pk.j[i] + off[i];
        fn(t);
        bool advanced = false;
        std::size_t i = n;
        while (i-- > 0) {
          if (i == f) continue;
          if (off[i] < (i < f ? r - 1 : r)) {
            ++off[i];
            advanced = true;
            break;
          }
          off[i] = i < f ? -(r - 1) : -r;
        }
        if (!advanced) break;
      }
    }
  }
}

// Grid-accelerated weighted k-th neighbor distances over a cube map. Scans
// Chebyshev rings outward; every cell r >= 1 rings out lies at least (r-1)
// cube sides away, which bounds how far the scan must go.
class GridKnn {
 public:
  GridKnn(const PointSet& ps, const CubeMap& map, std::uint64_t k,
          const std::vector<std::uint32_t>* mult)
      : ps_(ps), map_(map), k_(k), mult_(mult) {
    lo_.fill(std::numeric_limits<std::int64_t>::max());
    hi_.fill(std::numeric_limits<std::int64_t>::min());
    for (const CubeKey& key : map.keys)
      for (std::size_t i = 0; i < map.params.n; ++i) {
        lo_[i] = std::min(lo_[i], key.j[i]);
        hi_[i] = std::max(hi_[i], key.j[i]);
      }
  }

  // Squared distance to the k-th neighbor of p among mapped ids passing mask
  // (p's own multiplicity contributes weight mult-1 at distance zero), or
  // +inf when the candidates weigh less than k. evals counts distance calls.
  double core2(PointId p, const std::vector<std::uint8_t>* mask, std::uint64_t& evals) const {
    std::vector<std::pair<double, std::uint64_t>> heap;  // max-heap of (d2, weight)
    std::uint64_t total = 0;
    auto offer = [&](double d2, std::uint64_t w) {
      heap.emplace_back(d2, w);
      std::push_heap(heap.begin(), heap.end());
      total += w;
      // shed the far end while the k-th neighbor survives without it
      while (total - heap.front().second >= k_) {
        total -= heap.front().second;
        std::pop_heap(heap.begin(), heap.end());
        heap.pop_back();
      }
    };
    const std::uint64_t own = mult_ ? (*mult_)[p] : 1u;
    if (own > 1) offer(0.0, own - 1);
    if (map_.cube_count() == 0) return total >= k_ ? heap.front().first : kInf;

    const CubeKey pk = cube_key(ps_.row(p), map_.params);
    std::int64_t last_ring = 0;
    for (std::size_t i = 0; i < map_.params.n; ++i)
      last_ring = std::max({last_ring, pk.j[i] - lo_[i], hi_[i] - pk.j[i]});
    const double side = map_.params.side;

    auto scan_cell = [&](const CubeKey& key) {
      const std::uint32_t c = map_.cell_of_key(key);
      if (c == kNoCell) return;
      for (PointId q : map_.cells[c]) {
        if (q == p || (mask && !(*mask)[q])) continue;
        ++evals;
        offer(dist2(ps_, p, q), mult_ ? (*mult_)[q] : 1u);
      }
    };
    scan_cell(pk);
    for (std::int64_t r = 1; r <= last_ring; ++r) {
      if (total >= k_) {
        const double b = side * static_cast<double>(r - 1);
        if (heap.front().first <= b * b) break;
      }
      for_each_shell_key(pk, r, scan_cell);
    }
    return total >= k_ ? heap.front().first : kInf;
  }

 private:
  const PointSet& ps_;
  const CubeMap& map_;
  std::uint64_t k_;
  const std::vector<std::uint32_t>* mult_;
  std::array<std::int64_t, kMaxDim> lo_{};
  std::array<std::int64_t, kMaxDim> hi_{};
};

struct ClusterTreeW2 {
  std::vector<Edge> edges;  // spanning tree of the cluster; w holds SQUARED reach
  CoreDistances cores;      // squared; ids == cluster
  std::vector<PointId> ref;
  std::uint64_t evals = 0;
};

// Reference region, core distances and a spanning tree of the eps-sliced
// mutual-reachability graph restricted to one cluster. All weights squared.
ClusterTreeW2 cluster_tree_w2(const std::vector<PointId>& cluster, const CubeMap& ymap,
                              const PointSet& ps, double eps, std::uint64_t k,
                              const std::vector<std::uint32_t>* mult) {
  if (cluster.empty()) fail_param("empty cluster");
  if (!std::is_sorted(cluster.begin(), cluster.end())) fail_param("cluster ids must be ascending");

  ClusterTreeW2 out;
  RegionView view = classify_cubes(cluster, ymap);
  Extension ext = restrict_region(view, RegionPart::Closure, ymap.params.m_const, false);
  out.ref = std::move(ext.ids);

  std::vector<std::uint8_t> in_ref(ps.count(), 0);
  for (PointId id : out.ref) in_ref[id] = 1;
  GridKnn knn(ps, ymap, k, mult);
  out.cores.ids = cluster;
  out.cores.core2.resize(cluster.size());
  for (std::size_t i = 0; i < cluster.size(); ++i)
    out.cores.core2[i] = knn.core2(cluster[i], &in_ref, out.evals);

  const double eps2 = eps * eps;
  const std::size_t cn = cluster.size();
  auto local_of = [&](PointId id) {
    return static_cast<std::size_t>(
        std::lower_bound(cluster.begin(), cluster.end(), id) - cluster.begin());
  };
  std::vector<std::uint8_t> in_c(ps.count(), 0);
  for (PointId id : cluster) in_c[id] = 1;
  std::vector<std::uint8_t> visited(cn, 0);
  using Cand = std::tuple<double, PointId, PointId>;  // (w2, to, from)
  std::priority_queue<Cand, std::vector<Cand>, std::greater<Cand>> pq;

  // every member within eps of u sits in the m-ring of u's cube, so this
  // candidate sweep is complete for the eps-sliced graph
  auto expand = [&](PointId u) {
    const double cu = out.cores.core2[local_of(u)];
    const CubeKey ku = ymap.keys[ymap.point_cell[u]];
    for (const CubeKey& t : extension_keys(ku, ymap.params.m_const)) {
      const std::uint32_t c = ymap.cell_of_key(t);
      if (c == kNoCell) continue;
      for (PointId q : ymap.cells[c]) {
        if (q == u || !in_c[q] || visited[local_of(q)]) continue;
        ++out.evals;
        const double w2 = max3(cu, out.cores.core2[local_of(q)], dist2(ps, u, q));
        if (w2 <= eps2) pq.emplace(w2, q, u);
      }
    }
  };

  std::size_t reached = 1;
  visited[0] = 1;
  expand(cluster[0]);
  while (reached < cn && !pq.empty()) {
    const auto [w2, q, u] = pq.top();
    pq.pop();
    const std::size_t ql = local_of(q);
    if (visited[ql]) continue;
    visited[ql] = 1;
    ++reached;
    Edge e;
    e.u = std::min(u, q);
    e.v = std::max(u, q);
    e.w = w2;
    out.edges.push_back(e);
    expand(q);
  }
  if (reached != cn) throw std::logic_error("cluster spanning tree failed to reach every member");
  std::sort(out.edges.begin(), out.edges.end(), edge_key_less);
  return out;
}

// Keeps the lightest copy of each (u, v) pair and returns edges key-sorted.
std::vector<Edge> dedupe_min(std::vector<Edge> edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.u != b.u) return a.u < b.u;
    if (a.v != b.v) return a.v < b.v;
    return a.w < b.w;
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
              edges.end());
  return edges;
}

}  // namespace

JFSets j_f_sets(const Labeling& labels, const std::vector<PointId>& y_ids, const CubeMap& map) {
  JFSets out;
  std::int32_t nclusters = 0;
  for (PointId id : y_ids) nclusters = std::max(nclusters, labels.cluster[id] + 1);
  std::vector<std::vector<PointId>> members(static_cast<std::size_t>(nclusters));
  for (PointId id : y_ids) {
    const std::int32_t l = labels.cluster[id];
    if (l < 0) {
      out.j.push_back(id);
      out.f.push_back(id);
    } else {
      members[static_cast<std::size_t>(l)].push_back(id);
    }
  }
  for (std::vector<PointId>& c : members) {
    if (c.empty()) continue;
    const RegionView view = classify_cubes(std::move(c), map);
    const Extension keep = restrict_region(view, RegionPart::Boundary, map.params.n_const, true);
    const Extension wide = restrict_region(view, RegionPart::Boundary, map.params.N_const, true);
    out.j.insert(out.j.end(), keep.ids.begin(), keep.ids.end());
    out.f.insert(out.f.end(), wide.ids.begin(), wide.ids.end());
  }
  auto finish = [](std::vector<PointId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  finish(out.j);
  finish(out.f);
  return out;
}

PerClusterGraph per_cluster_graph(const std::vector<PointId>& cluster, const CubeMap& ymap,
                                  const PointSet& ps, double eps, std::uint64_t k,
                                  const std::vector<std::uint32_t>* mult) {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail_param("eps must be positive and finite");
  if (eps > ymap.params.eps) fail_param("slice scale exceeds the map's radius");
  ClusterTreeW2 t = cluster_tree_w2(cluster, ymap, ps, eps, k, mult);
  PerClusterGraph out;
  out.tree.vertices = cluster;
  out.tree.edges = std::move(t.edges);
  for (Edge& e : out.tree.edges) e.w = std::sqrt(e.w);
  out.cores = std::move(t.cores);
  out.reference_ids = std::move(t.ref);
  out.distance_evals = t.evals;
  return out;
}

IterationState begin_staged(const PointSet& ps, std::uint64_t k, int workers,
                            std::vector<PointId> ids, std::vector<std::uint32_t> weights) {
  if (k < 1 || k > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    fail_param("k must be at least 1");
  if (workers < 1) fail_param("workers must be at least 1");
  if (!weights.empty() && weights.size() != ps.count())
    fail_param("weights must align with point ids");
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) fail_param("empty id set");
  if (ids.back() >= ps.count()) fail_param("id out of range");

  IterationState st;
  st.ps = &ps;
  st.k = k;
  st.workers = workers;
  st.weights = std::move(weights);
  st.universe = ids;
  st.x = std::move(ids);
  st.labels.cluster.assign(ps.count(), kNoise);
  st.core2_first.assign(ps.count(), kNaN);
  return st;
}

void advance_iteration(IterationState& st, double eps_next) {
  if (st.ps == nullptr) fail_param("uninitialized iteration state");
  if (!std::isfinite(eps_next) || eps_next <= st.eps)
    fail_param("scales must be finite, positive and strictly increasing");
  const auto t0 = std::chrono::steady_clock::now();
  const PointSet& ps = *st.ps;
  const std::vector<std::uint32_t>* mult = st.weights.empty() ? nullptr : &st.weights;

  DbscanOutput out = s_dbscan_star(ps, eps_next, static_cast<int>(st.k), st.workers, &st.x, mult);

  std::vector<std::vector<PointId>> clusters(out.cluster_count);
  for (PointId id : st.x) {
    const std::int32_t l = out.labels.cluster[id];
    if (l >= 0) clusters[static_cast<std::size_t>(l)].push_back(id);
  }

  // component tokens of the accumulator before this pass; edges repeating
  // that connectivity carry no new merges and are dropped below
  std::vector<std::uint32_t> token(ps.count(), 0);
  {
    UnionFind uf(ps.count());
    for (const Edge& e : st.h_edges) uf.unite(e.u, e.v);
    for (PointId id : st.x) token[id] = static_cast<std::uint32_t>(uf.find(id));
  }
  const double eps_prev2 = st.eps * st.eps;

  struct Slot {
    std::vector<Edge> kept;
    std::pair<std::uint32_t, std::uint32_t> sizes{0, 0};
  };
  std::vector<Slot> slots(clusters.size());
  parallel_items(clusters.size(), st.workers, [&](std::size_t ci) {
    const std::vector<PointId>& cl = clusters[ci];
    ClusterTreeW2 t = cluster_tree_w2(cl, out.map, ps, eps_next, st.k, mult);
    for (std::size_t i = 0; i < cl.size(); ++i)
      if (std::isnan(st.core2_first[cl[i]])) st.core2_first[cl[i]] = t.cores.core2[i];
    Slot& s = slots[ci];
    for (const Edge& e : t.edges)
      if (e.w > eps_prev2 && token[e.u] != token[e.v]) s.kept.push_back(e);
    s.sizes = {static_cast<std::uint32_t>(cl.size()), static_cast<std::uint32_t>(t.ref.size())};
  });

  const JFSets jf = j_f_sets(out.labels, st.x, out.map);

  StageReport rep;
  rep.index = st.index + 1;
  rep.eps = eps_next;
  rep.x_size = st.x.size();
  rep.cluster_count = clusters.size();
  rep.j_size = jf.j.size();
  rep.f_size = jf.f.size();
  for (Slot& s : slots) {
    st.h_edges.insert(st.h_edges.end(), s.kept.begin(), s.kept.end());
    rep.tree_sizes.push_back(s.sizes);
  }
  rep.seconds = seconds_since(t0);
  st.reports.push_back(rep);

  st.labels = out.labels;
  st.cluster_count = out.cluster_count;
  st.x = jf.f;
  st.index += 1;
  st.eps = eps_next;
}

WeightedGraph finalize_staged(IterationState& st) {
  if (st.ps == nullptr) fail_param("uninitialized iteration state");
  if (st.index < 1) fail_param("the finishing pass needs a completed schedule");
  const auto t0 = std::chrono::steady_clock::now();
  const PointSet& ps = *st.ps;
  const std::vector<std::uint32_t>* mult = st.weights.empty() ? nullptr : &st.weights;
  const std::vector<PointId>& y = st.x;

  std::uint64_t total = 0;
  for (PointId id : y) total += mult ? (*mult)[id] : 1u;

  std::vector<Edge> kept;
  if (total >= 1 && total - 1 >= st.k) {
    const CubeMap map = build_cube_map(ps, derive_constants(ps.dim, st.eps), &y);
    const GridKnn knn(ps, map, st.k, mult);
    const std::size_t yn = y.size();
    std::vector<double> core2(yn, kInf);
    parallel_chunks(yn, st.workers, [&](std::size_t lo, std::size_t hi, std::size_t) {
      std::uint64_t ev = 0;
      for (std::size_t i = lo; i < hi; ++i) core2[i] = knn.core2(y[i], nullptr, ev);
    });
    for (std::size_t i = 0; i < yn; ++i)
      if (std::isnan(st.core2_first[y[i]])) st.core2_first[y[i]] = core2[i];

    // spanning tree of the unbounded reachability graph over the survivors
    std::vector<double> best2(yn, kInf);
    std::vector<std::uint32_t> parent(yn, 0);
    std::vector<std::uint8_t> done(yn, 0);
    best2[0] = 0.0;
    std::vector<Edge> tree;
    tree.reserve(yn > 0 ? yn - 1 : 0);
    for (std::size_t step = 0; step < yn; ++step) {
      std::size_t u = yn;
      for (std::size_t i = 0; i < yn; ++i)
        if (!done[i] && (u == yn || best2[i] < best2[u])) u = i;
      if (u == yn || best2[u] == kInf) break;
      done[u] = 1;
      if (u != 0) {
        Edge e;
        e.u = std::min(y[parent[u]], y[u]);
        e.v = std::max(y[parent[u]], y[u]);
        e.w = best2[u];
        tree.push_back(e);
      }
      for (std::size_t i = 0; i < yn; ++i) {
        if (done[i]) continue;
        const double w2 = max3(core2[u], core2[i], dist2(ps, y[u], y[i]));
        if (w2 < best2[i]) {
          best2[i] = w2;
          parent[i] = static_cast<std::uint32_t>(u);
        }
      }
    }

    std::vector<std::uint32_t> token(ps.count(), 0);
    UnionFind uf(ps.count());
    for (const Edge& e : st.h_edges) uf.unite(e.u, e.v);
    for (PointId id : y) token[id] = static_cast<std::uint32_t>(uf.find(id));
    const double eps_last2 = st.eps * st.eps;
    for (const Edge& e : tree)
      if (!(e.w <= eps_last2 && token[e.u] == token[e.v])) kept.push_back(e);
  } else {
    // too few survivors for a core distance: they stay isolated
    for (PointId id : y)
      if (std::isnan(st.core2_first[id])) st.core2_first[id] = kInf;
  }
  st.h_edges.insert(st.h_edges.end(), kept.begin(), kept.end());

  WeightedGraph g;
  g.vertices = st.universe;
  std::vector<Edge> edges = dedupe_min(st.h_edges);
  for (Edge& e : edges) e.w = std::sqrt(e.w);
  g.edges = std::move(edges);

  StageReport rep;
  rep.index = 0;
  rep.eps = kInf;
  rep.x_size = y.size();
  rep.tree_sizes.emplace_back(static_cast<std::uint32_t>(y.size()),
                              static_cast<std::uint32_t>(y.size()));
  rep.seconds = seconds_since(t0);
  st.reports.push_back(rep);
  return g;
}

StagedResult s_hdbscan_star(const PointSet& ps, std::uint64_t k, std::uint64_t m,
                            const std::vector<double>& schedule, int workers,
                            bool exclude_root, bool early_stop) {
  if (ps.count() == 0) fail_param("empty point set");
  if (k < 1) fail_param("k must be at least 1");
  if (m < 1) fail_param("min cluster size must be at least 1");
  if (ps.count() - 1 < k) fail_param("insufficient points: need more than k points");
  if (schedule.empty()) fail_param("schedule must contain at least one scale");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!std::isfinite(schedule[i]) || schedule[i] <= 0.0)
      fail_param("schedule scales must be positive and finite");
    if (i > 0 && schedule[i] <= schedule[i - 1])
      fail_param("schedule scales must be strictly increasing");
  }

  StagedResult res;
  res.groups = merge_duplicates(ps);
  std::vector<std::uint32_t> weights;
  if (!res.groups.trivial()) {
    weights.assign(ps.count(), 1u);
    for (std::size_t g = 0; g < res.groups.rep.size(); ++g)
      weights[res.groups.rep[g]] = res.groups.mult[g];
  }

  IterationState st = begin_staged(ps, k, workers, res.groups.rep, std::move(weights));
  for (double eps : schedule) advance_iteration(st, eps);

  if (early_stop) {
    // skip the finishing pass: keep the accumulator as-is and leave
    // never-clustered survivors isolated
    for (PointId id : st.universe)
      if (std::isnan(st.core2_first[id])) st.core2_first[id] = kInf;
    res.final_graph.vertices = st.universe;
    std::vector<Edge> edges = dedupe_min(st.h_edges);
    for (Edge& e : edges) e.w = std::sqrt(e.w);
    res.final_graph.edges = std::move(edges);
    res.approximate = true;
  } else {
    res.final_graph = finalize_staged(st);
  }
  res.reports = st.reports;

  const std::size_t r = st.universe.size();
  std::vector<std::uint32_t> lmult(r, 1u);
  if (!st.weights.empty())
    for (std::size_t i = 0; i < r; ++i) lmult[i] = st.weights[st.universe[i]];
  std::vector<double> act(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double c2 = st.core2_first[st.universe[i]];
    if (std::isnan(c2)) throw std::logic_error("missing activation after the finishing pass");
    act[i] = std::sqrt(c2);
  }
  res.dendro = build_dendrogram(res.final_graph, &lmult, &act);
  res.classes = condense(res.dendro, m);
  const SelectionResult sel = select_clusters(res.classes, res.dendro, exclude_root);
  res.chosen = sel.chosen;
  res.total_score = sel.total_score;

  std::vector<std::int64_t> raw(ps.count(), -1);
  for (PointId id = 0; id < ps.count(); ++id) {
    const std::int32_t lab = sel.leaf_label[res.groups.group_of[id]];
    raw[id] = lab < 0 ? -1 : lab;
  }
  res.labels = canonicalize_partition(raw);
  return res;
}

}  // namespace cubeclust
