#pragma once

#include <cstdint>
#include <vector>

#include "cubeclust/points.hpp"

namespace cubeclust {

// Undirected weighted edge, canonical orientation u < v.
struct Edge {
  PointId u = 0;
  PointId v = 0;
  double w = 0.0;

  bool operator==(const Edge&) const = default;
};

inline bool edge_key_less(const Edge& a, const Edge& b) {
  return a.u != b.u ? a.u < b.u : a.v < b.v;
}

// Simple undirected graph. Invariants: vertices sorted unique; edges sorted
// by (u, v), unique, u < v, both endpoints present, weights finite.
struct WeightedGraph {
  std::vector<PointId> vertices;
  std::vector<Edge> edges;
};

// Partition of a vertex set; comp[i] is the smallest point id in the
// component of ids[i]. ids sorted ascending.
struct ComponentPartition {
  std::vector<PointId> ids;
  std::vector<PointId> comp;

  PointId component_of(PointId id) const;
  bool same(PointId a, PointId b) const { return component_of(a) == component_of(b); }
  std::size_t component_count() const;
};

// Keep edges with w <= eps; vertex set unchanged.
WeightedGraph slice(const WeightedGraph& g, double eps);

// Induced subgraph on vertices of degree >= k.
WeightedGraph degree_filter(const WeightedGraph& g, int k);

// Union of vertex sets and edge sets; a shared edge keeps the smaller weight.
WeightedGraph graph_union(const WeightedGraph& a, const WeightedGraph& b);

ComponentPartition components(const WeightedGraph& g);

// Kruskal forest with deterministic (weight, u, v) tie-breaking. For every
// threshold a, slicing the forest at a yields the same components as slicing
// the input at a.
WeightedGraph min_spanning_forest(const WeightedGraph& g);

// Labeling over [0, universe) from a partition: cluster ids contiguous from 0
// in order of smallest member id; ids not in the partition become noise.
// Components consisting of a single vertex can optionally be kept as
// singleton clusters (DBSCAN* clusters may be singletons only via the
// degree-filter path, where isolated core vertices are real clusters).
Labeling partition_to_labels(const ComponentPartition& p, std::size_t universe);

}  // namespace cubeclust
