#include "cubeclust/graph.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "cubeclust/detail/union_find.hpp"
#include "cubeclust/errors.hpp"

namespace cubeclust {

namespace {

std::size_t index_of(const std::vector<PointId>& ids, PointId id) {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

PointId ComponentPartition::component_of(PointId id) const {
  const std::size_t i = index_of(ids, id);
  if (i >= ids.size() || ids[i] != id) fail_param("id not in partition");
  return comp[i];
}

std::size_t ComponentPartition::component_count() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (comp[i] == ids[i]) ++c;
  return c;
}

WeightedGraph slice(const WeightedGraph& g, double eps) {
  WeightedGraph out;
  out.vertices = g.vertices;
  out.edges.reserve(g.edges.size());
  for (const Edge& e : g.edges)
    if (e.w <= eps) out.edges.push_back(e);
  return out;
}

WeightedGraph degree_filter(const WeightedGraph& g, int k) {
  std::vector<std::uint32_t> deg(g.vertices.size(), 0);
  for (const Edge& e : g.edges) {
    ++deg[index_of(g.vertices, e.u)];
    ++deg[index_of(g.vertices, e.v)];
  }
  WeightedGraph out;
  std::vector<std::uint8_t> keep(g.vertices.size(), 0);
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    if (deg[i] >= static_cast<std::uint32_t>(k)) {
      keep[i] = 1;
      out.vertices.push_back(g.vertices[i]);
    }
  }
  for (const Edge& e : g.edges)
    if (keep[index_of(g.vertices, e.u)] && keep[index_of(g.vertices, e.v)]) out.edges.push_back(e);
  return out;
}

WeightedGraph graph_union(const WeightedGraph& a, const WeightedGraph& b) {
  WeightedGraph out;
  out.vertices.reserve(a.vertices.size() + b.vertices.size());
  std::set_union(a.vertices.begin(), a.vertices.end(), b.vertices.begin(), b.vertices.end(),
                 std::back_inserter(out.vertices));
  out.edges.reserve(a.edges.size() + b.edges.size());
  std::size_t i = 0, j = 0;
  while (i < a.edges.size() || j < b.edges.size()) {
    if (j == b.edges.size() || (i < a.edges.size() && edge_key_less(a.edges[i], b.edges[j]))) {
      out.edges.push_back(a.edges[i++]);
    } else if (i == a.edges.size() || edge_key_less(b.edges[j], a.edges[i])) {
      out.edges.push_back(b.edges[j++]);
    } else {
      Edge e = a.edges[i];
      e.w = std::min(e.w, b.edges[j].w);
      out.edges.push_back(e);
      ++i;
      ++j;
    }
  }
  return out;
}

ComponentPartition components(const WeightedGraph& g) {
  UnionFind uf(g.vertices.size());
  for (const Edge& e : g.edges) uf.unite(index_of(g.vertices, e.u), index_of(g.vertices, e.v));
  // Smallest member id per root; vertices ascend, so first hit is smallest.
  std::vector<PointId> canon(g.vertices.size(), kNoPoint);
  ComponentPartition p;
  p.ids = g.vertices;
  p.comp.resize(g.vertices.size());
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    const std::size_t r = uf.find(i);
    if (canon[r] == kNoPoint) canon[r] = g.vertices[i];
    p.comp[i] = canon[r];
  }
  return p;
}

WeightedGraph min_spanning_forest(const WeightedGraph& g) {
  std::vector<std::size_t> order(g.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Edge& ea = g.edges[a];
    const Edge& eb = g.edges[b];
    if (ea.w != eb.w) return ea.w < eb.w;
    return edge_key_less(ea, eb);
  });
  UnionFind uf(g.vertices.size());
  WeightedGraph out;
  out.vertices = g.vertices;
  for (std::size_t t : order) {
    const Edge& e = g.edges[t];
    if (uf.unite(index_of(g.vertices, e.u), index_of(g.vertices, e.v))) out.edges.push_back(e);
  }
  std::sort(out.edges.begin(), out.edges.end(), edge_key_less);
  return out;
}

Labeling partition_to_labels(const ComponentPartition& p, std::size_t universe) {
  std::vector<std::int64_t> raw(universe, -1);
  for (std::size_t i = 0; i < p.ids.size(); ++i) raw[p.ids[i]] = p.comp[i];
  return canonicalize_partition(raw);
}

}  // namespace cubeclust
