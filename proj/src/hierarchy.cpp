#include "cubeclust/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cubeclust/detail/union_find.hpp"
#include "cubeclust/errors.hpp"
#include "cubeclust/parallel.hpp"

namespace cubeclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max3(double a, double b, double c) { return std::max(a, std::max(b, c)); }

}  // namespace

double CoreDistances::core2_of(PointId id) const {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) fail_param("no core distance recorded for id");
  return core2[static_cast<std::size_t>(it - ids.begin())];
}

CoreDistances core_distances(const std::vector<PointId>& q_ids, const std::vector<PointId>& r_ids,
                             const PointSet& ps, std::uint64_t k,
                             const std::vector<std::uint32_t>* mult, int workers) {
  std::uint64_t total = 0;
  for (PointId r : r_ids) total += mult ? (*mult)[r] : 1u;
  if (total == 0 || total - 1 < k)
    fail_param("insufficient points: need more than k neighbors in the reference set");
  CoreDistances out;
  out.ids = q_ids;
  std::sort(out.ids.begin(), out.ids.end());
  out.core2.assign(out.ids.size(), 0.0);
  parallel_items(out.ids.size(), workers, [&](std::size_t i) {
    const PointId p = out.ids[i];
    // Weighted k-th smallest distance: own coincident copies count at zero.
    std::vector<std::pair<double, std::uint64_t>> cand;
    cand.reserve(r_ids.size() + 1);
    const std::uint64_t own = mult ? (*mult)[p] : 1u;
    if (own > 1) cand.emplace_back(0.0, own - 1);
    for (PointId q : r_ids) {
      if (q == p) continue;
      cand.emplace_back(dist2(ps, p, q), mult ? (*mult)[q] : 1u);
    }
    std::sort(cand.begin(), cand.end());
    std::uint64_t acc = 0;
    double val = kInf;
    for (const auto& [d2, w] : cand) {
      acc += w;
      if (acc >= k) {
        val = d2;
        break;
      }
    }
    out.core2[i] = val;
  });
  return out;
}

double reach_weight(PointId p, PointId q, const CoreDistances& cores, const PointSet& ps) {
  if (p == q) return 0.0;
  return std::sqrt(max3(cores.core2_of(p), cores.core2_of(q), dist2(ps, p, q)));
}

WeightedGraph mutual_reach_graph(const std::vector<PointId>& ids, const PointSet& ps,
                                 const CoreDistances& cores, std::size_t cap) {
  if (ids.size() > cap)
    fail_param("refusing complete reachability graph on " + std::to_string(ids.size()) +
               " points (cap " + std::to_string(cap) + ")");
  WeightedGraph g;
  g.vertices = ids;
  std::sort(g.vertices.begin(), g.vertices.end());
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < g.vertices.size(); ++j) {
      Edge e;
      e.u = g.vertices[i];
      e.v = g.vertices[j];
      e.w = reach_weight(e.u, e.v, cores, ps);
      g.edges.push_back(e);
    }
  return g;
}

std::uint32_t Dendrogram::leaf_index(PointId id) const {
  const auto it = std::lower_bound(leaf_ids.begin(), leaf_ids.end(), id);
  if (it == leaf_ids.end() || *it != id) fail_param("id is not a dendrogram leaf");
  return static_cast<std::uint32_t>(it - leaf_ids.begin());
}

Dendrogram build_dendrogram(const WeightedGraph& g, const std::vector<std::uint32_t>* mult,
                            const std::vector<double>* activation) {
  Dendrogram d;
  d.leaf_ids = g.vertices;
  const std::size_t n = d.leaf_ids.size();
  d.mult = mult ? *mult : std::vector<std::uint32_t>(n, 1u);
  d.activation = activation ? *activation : std::vector<double>(n, 0.0);
  if (d.mult.size() != n || d.activation.size() != n)
    fail_param("dendrogram leaf annotations must align with graph vertices");

  const WeightedGraph forest = min_spanning_forest(g);
  std::vector<std::size_t> order(forest.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Edge& ea = forest.edges[a];
    const Edge& eb = forest.edges[b];
    if (ea.w != eb.w) return ea.w < eb.w;
    return edge_key_less(ea, eb);
  });

  UnionFind uf(n);
  std::vector<std::int32_t> node_of(n);
  std::iota(node_of.begin(), node_of.end(), 0);
  std::int32_t next_node = static_cast<std::int32_t>(n);
  for (std::size_t t : order) {
    const Edge& e = forest.edges[t];
    Dendrogram::Merge mg;
    mg.w = e.w;
    mg.lu = d.leaf_index(e.u);
    mg.lv = d.leaf_index(e.v);
    const std::size_t ra = uf.find(mg.lu);
    const std::size_t rb = uf.find(mg.lv);
    mg.a = std::min(node_of[ra], node_of[rb]);
    mg.b = std::max(node_of[ra], node_of[rb]);
    uf.unite(ra, rb);
    node_of[uf.find(ra)] = next_node++;
    d.merges.push_back(mg);
  }
  return d;
}

double persistence_score(const EquivalenceClass& c) {
  if (!(c.birth > 0.0))
    fail_param("persistence score diverges: class born at scale 0 "
               "(more than k coincident points)");
  double s = 0.0;
  for (std::size_t i = 0; i < c.size_steps.size(); ++i) {
    const double a = c.size_steps[i].first;
    const double b = i + 1 < c.size_steps.size() ? c.size_steps[i + 1].first : c.end;
    const double sz = static_cast<double>(c.size_steps[i].second);
    s += std::isinf(b) ? sz / a : sz * (1.0 / a - 1.0 / b);
  }
  return s;
}

std::vector<EquivalenceClass> condense(const Dendrogram& d, std::uint64_t m) {
  if (m < 1) fail_param("minimum cluster size must be at least 1");
  const std::size_t n = d.leaf_count();
  UnionFind uf(n);
  std::vector<std::int32_t> class_of(n, -1);
  std::vector<std::uint64_t> msize(n);
  std::vector<std::uint32_t> min_member(n);
  std::vector<std::vector<std::uint32_t>> members(n);
  for (std::uint32_t l = 0; l < n; ++l) {
    msize[l] = d.mult[l];
    min_member[l] = l;
    members[l] = {l};
  }
  std::vector<EquivalenceClass> classes;

  // A component counts as a cluster strictly below scale w when its weight
  // reaches m and, if it is a lone leaf, that leaf activated before w.
  auto cluster_before = [&](std::size_t root, double w) {
    if (msize[root] < m) return false;
    if (members[root].size() > 1) return true;
    return d.activation[members[root][0]] < w;
  };
  auto ensure_class = [&](std::size_t root) {
    if (class_of[root] >= 0) return class_of[root];
    // Lone-leaf cluster materializing lazily: born at its activation scale.
    const std::uint32_t l = members[root][0];
    EquivalenceClass c;
    c.id = static_cast<std::int32_t>(classes.size());
    c.birth = d.activation[l];
    c.size_steps.emplace_back(c.birth, msize[root]);
    classes.push_back(std::move(c));
    class_of[root] = classes.back().id;
    return classes.back().id;
  };
  auto support_of = [&](const std::vector<std::uint32_t>& mem) {
    std::vector<PointId> s;
    s.reserve(mem.size());
    for (std::uint32_t l : mem) s.push_back(d.leaf_ids[l]);
    std::sort(s.begin(), s.end());
    return s;
  };

  std::size_t t = 0;
  while (t < d.merges.size()) {
    std::size_t e = t;
    const double w = d.merges[t].w;
    while (e < d.merges.size() && d.merges[e].w == w) ++e;

    // Snapshot components before any merge of this batch, then join all.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = t; i < e; ++i)
      pairs.emplace_back(uf.find(d.merges[i].lu), uf.find(d.merges[i].lv));
    std::vector<std::size_t> touched;
    for (const auto& [ra, rb] : pairs) {
      touched.push_back(ra);
      touched.push_back(rb);
      uf.unite(ra, rb);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    std::map<std::size_t, std::vector<std::size_t>> groups;  // post-root -> pre-roots
    for (std::size_t r : touched) groups[uf.find(r)].push_back(r);
    std::vector<std::pair<std::uint32_t, std::size_t>> group_order;
    for (const auto& [post, pres] : groups) {
      std::uint32_t mm = 0xffffffffu;
      for (std::size_t r : pres) mm = std::min(mm, min_member[r]);
      group_order.emplace_back(mm, post);
    }
    std::sort(group_order.begin(), group_order.end());

    for (const auto& [mm, post] : group_order) {
      (void)mm;
      const auto& pres = groups[post];
      std::vector<std::size_t> pre_clusters;
      for (std::size_t r : pres)
        if (cluster_before(r, w)) pre_clusters.push_back(r);
      std::sort(pre_clusters.begin(), pre_clusters.end(),
                [&](std::size_t a, std::size_t b) { return min_member[a] < min_member[b]; });

      std::uint64_t total = 0;
      for (std::size_t r : pres) total += msize[r];

      std::int32_t new_class = -1;
      if (pre_clusters.size() >= 2) {
        // Several clusters meet: all of them end here, a new class is born.
        std::vector<std::int32_t> kids;
        for (std::size_t r : pre_clusters) kids.push_back(ensure_class(r));
        EquivalenceClass c;
        c.id = static_cast<std::int32_t>(classes.size());
        c.birth = w;
        c.size_steps.emplace_back(w, total);
        c.children = kids;
        classes.push_back(std::move(c));
        new_class = classes.back().id;
        for (std::size_t i = 0; i < pre_clusters.size(); ++i) {
          EquivalenceClass& k = classes[static_cast<std::size_t>(kids[i])];
          k.end = w;
          k.parent = new_class;
          k.support = support_of(members[pre_clusters[i]]);
        }
      } else if (pre_clusters.size() == 1) {
        // The one live cluster keeps its identity and absorbs the rest.
        new_class = ensure_class(pre_clusters[0]);
        classes[static_cast<std::size_t>(new_class)].size_steps.emplace_back(w, total);
      } else if (total >= m) {
        EquivalenceClass c;
        c.id = static_cast<std::int32_t>(classes.size());
        c.birth = w;
        c.size_steps.emplace_back(w, total);
        classes.push_back(std::move(c));
        new_class = classes.back().id;
      }

      // Fold member lists into the post-root slot, largest list first.
      std::size_t big = pres[0];
      for (std::size_t r : pres)
        if (members[r].size() > members[big].size()) big = r;
      std::vector<std::uint32_t> merged = std::move(members[big]);
      std::uint32_t mmin = min_member[big];
      for (std::size_t r : pres) {
        if (r == big) continue;
        merged.insert(merged.end(), members[r].begin(), members[r].end());
        members[r].clear();
        mmin = std::min(mmin, min_member[r]);
      }
      members[post] = std::move(merged);
      msize[post] = total;
      min_member[post] = mmin;
      class_of[post] = new_class;
    }
    t = e;
  }

  // Components alive at every scale: close out their classes at infinity.
  for (std::size_t l = 0; l < n; ++l) {
    if (uf.find(l) != l) continue;
    if (class_of[l] < 0) {
      if (msize[l] >= m && members[l].size() == 1 && std::isfinite(d.activation[members[l][0]]))
        ensure_class(l);
      else
        continue;
    }
    EquivalenceClass& c = classes[static_cast<std::size_t>(class_of[l])];
    c.support = support_of(members[l]);
  }
  for (EquivalenceClass& c : classes) c.score = persistence_score(c);
  return classes;
}

SelectionResult select_clusters(const std::vector<EquivalenceClass>& classes, const Dendrogram& d,
                                bool exclude_root) {
  SelectionResult res;
  res.leaf_label.assign(d.leaf_count(), -1);
  // Children always carry smaller ids than their parent, so one ascending
  // sweep sees every child before its parent.
  std::vector<double> value(classes.size(), 0.0);
  std::vector<std::uint8_t> take(classes.size(), 0);
  for (std::size_t v = 0; v < classes.size(); ++v) {
    double child_sum = 0.0;
    for (std::int32_t c : classes[v].children) child_sum += value[static_cast<std::size_t>(c)];
    const bool selectable = !(exclude_root && classes[v].parent == -1);
    if (selectable && classes[v].score >= child_sum) {
      value[v] = classes[v].score;
      take[v] = 1;
    } else {
      value[v] = child_sum;
      take[v] = 0;
    }
  }
  // Walk down from the roots; a taken class masks its whole subtree.
  std::vector<std::int32_t> stack;
  for (std::size_t v = 0; v < classes.size(); ++v)
    if (classes[v].parent == -1) stack.push_back(static_cast<std::int32_t>(v));
  while (!stack.empty()) {
    const std::int32_t v = stack.back();
    stack.pop_back();
    const auto& c = classes[static_cast<std::size_t>(v)];
    if (take[static_cast<std::size_t>(v)]) {
      res.chosen.push_back(v);
      for (PointId id : c.support) res.leaf_label[d.leaf_index(id)] = v;
    } else {
      for (std::int32_t ch : c.children) stack.push_back(ch);
    }
  }
  std::sort(res.chosen.begin(), res.chosen.end());
  for (std::size_t v = 0; v < classes.size(); ++v)
    if (classes[v].parent == -1) res.total_score += value[v];
  return res;
}

HdbscanOracleResult hdbscan_star_oracle(const PointSet& ps, std::uint64_t k, std::uint64_t m,
                                        std::size_t cap, bool exclude_root) {
  if (ps.count() == 0) fail_param("empty point set");
  if (ps.count() > cap)
    fail_param("refusing brute-force hierarchy on " + std::to_string(ps.count()) + " points (cap " +
               std::to_string(cap) + ")");
  HdbscanOracleResult res;
  res.groups = merge_duplicates(ps);
  const std::size_t r = res.groups.rep.size();
  if (ps.count() - 1 < k) fail_param("insufficient points: need more than k points");

  const std::vector<PointId>& reps = res.groups.rep;
  // core_distances wants per-id weights; groups.mult is per group
  std::vector<std::uint32_t> weight_by_id(ps.count(), 1u);
  for (std::size_t g = 0; g < r; ++g) weight_by_id[reps[g]] = res.groups.mult[g];
  CoreDistances cores = core_distances(reps, reps, ps, k, &weight_by_id, 1);

  // Prim over the implicit complete reachability graph, O(r^2) and exact.
  std::vector<double> best2(r, kInf);
  std::vector<std::uint32_t> parent(r, 0);
  std::vector<std::uint8_t> done(r, 0);
  std::vector<double> core2(r);
  for (std::size_t i = 0; i < r; ++i) core2[i] = cores.core2_of(reps[i]);
  best2[0] = 0.0;
  res.mst.vertices = reps;
  for (std::size_t step = 0; step < r; ++step) {
    std::size_t u = r;
    for (std::size_t i = 0; i < r; ++i)
      if (!done[i] && (u == r || best2[i] < best2[u])) u = i;
    done[u] = 1;
    if (u != 0) {
      Edge e;
      e.u = std::min(reps[parent[u]], reps[u]);
      e.v = std::max(reps[parent[u]], reps[u]);
      e.w = std::sqrt(best2[u]);
      res.mst.edges.push_back(e);
    }
    for (std::size_t i = 0; i < r; ++i) {
      if (done[i]) continue;
      const double w2 = max3(core2[u], core2[i], dist2(ps, reps[u], reps[i]));
      if (w2 < best2[i]) {
        best2[i] = w2;
        parent[i] = static_cast<std::uint32_t>(u);
      }
    }
  }
  std::sort(res.mst.edges.begin(), res.mst.edges.end(), edge_key_less);

  std::vector<double> act(r);
  for (std::size_t i = 0; i < r; ++i) act[i] = std::sqrt(core2[i]);
  res.dendro = build_dendrogram(res.mst, &res.groups.mult, &act);
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
