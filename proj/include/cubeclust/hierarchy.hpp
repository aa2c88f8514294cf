#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cubeclust/graph.hpp"
#include "cubeclust/points.hpp"

namespace cubeclust {

// Squared distance to the k-th nearest neighbor, per queried id. Squared
// values are kept internally so threshold tests agree bit-for-bit with plain
// squared-distance comparisons; callers take sqrt only at output boundaries.
struct CoreDistances {
  std::vector<PointId> ids;    // ascending
  std::vector<double> core2;   // aligned with ids

  double core2_of(PointId id) const;
};

// Brute-force k-th nearest neighbor distances of Q within reference set R.
// With per-id multiplicities, an id counts as that many coincident points
// (a point's own group contributes mult-1 zero-distance neighbors).
CoreDistances core_distances(const std::vector<PointId>& q_ids, const std::vector<PointId>& r_ids,
                             const PointSet& ps, std::uint64_t k,
                             const std::vector<std::uint32_t>* mult = nullptr, int workers = 1);

// Mutual reachability: max of the two core distances and the point distance.
double reach_weight(PointId p, PointId q, const CoreDistances& cores, const PointSet& ps);

// Complete mutual-reachability graph; refuses more than cap ids.
WeightedGraph mutual_reach_graph(const std::vector<PointId>& ids, const PointSet& ps,
                                 const CoreDistances& cores, std::size_t cap = 20000);

// Single-linkage merge tree. Leaves are indices into leaf_ids; merge t
// creates node leaf_count + t. Activation is the scale at which a leaf can
// first count as a cluster on its own (its core distance); multiplicity is
// the number of coincident points the leaf stands for.
struct Dendrogram {
  std::vector<PointId> leaf_ids;      // ascending
  std::vector<std::uint32_t> mult;    // per leaf
  std::vector<double> activation;     // per leaf, output scale
  struct Merge {
    double w = 0.0;
    std::int32_t a = -1, b = -1;      // dendrogram nodes joined, a < b
    std::uint32_t lu = 0, lv = 0;     // leaf indices of the generating edge
  };
  std::vector<Merge> merges;          // ascending by (w, edge id order)

  std::size_t leaf_count() const { return leaf_ids.size(); }
  std::uint32_t leaf_index(PointId id) const;
};

// Builds the merge tree of the minimum spanning forest of g. mult/activation
// are aligned with g.vertices; defaults are 1 and 0.
Dendrogram build_dendrogram(const WeightedGraph& g,
                            const std::vector<std::uint32_t>* mult = nullptr,
                            const std::vector<double>* activation = nullptr);

// A maximal run of scales over which a >= m-sized cluster keeps its identity:
// it may grow by absorbing sub-m fragments (size_steps) but ends the moment
// it merges with another >= m cluster (or never, for roots). Supports of
// distinct classes never partially overlap, so classes form a forest.
struct EquivalenceClass {
  std::int32_t id = -1;
  std::int32_t parent = -1;                                 // -1 for roots
  std::vector<std::int32_t> children;                       // ascending
  double birth = 0.0;                                       // first scale alive
  double end = std::numeric_limits<double>::infinity();     // scale absorbed; inf for roots
  std::vector<std::pair<double, std::uint64_t>> size_steps; // (scale, weighted size), ascending
  std::vector<PointId> support;                             // leaf ids ever members, ascending
  double score = 0.0;                                       // persistence mass, see persistence_score
};

// Integral of size(scale)/scale^2 over [birth, end): each constant piece
// [a, b) with size s contributes s*(1/a - 1/b); a class born at scale 0
// diverges and raises an error.
double persistence_score(const EquivalenceClass& c);

// Extracts all equivalence classes of >= m-weighted clusters from the merge
// tree. Merges at equal scale act simultaneously. Scores are filled in.
std::vector<EquivalenceClass> condense(const Dendrogram& d, std::uint64_t m);

// Picks the subset of classes with pairwise-disjoint supports maximizing the
// score sum. Supports are laminar, so a bottom-up sweep is exact; a parent
// whose score ties the best of its children wins. exclude_root bars root
// classes from selection.
struct SelectionResult {
  std::vector<std::int32_t> chosen;       // ascending class ids
  double total_score = 0.0;
  std::vector<std::int32_t> leaf_label;   // per leaf index: chosen class id or -1
};

SelectionResult select_clusters(const std::vector<EquivalenceClass>& classes, const Dendrogram& d,
                                bool exclude_root = false);

// Reference pipeline: exact core distances, complete-graph minimum spanning
// tree by direct scan, then the same condense/select path. Coincident points
// are collapsed to weighted representatives and labels expanded back.
struct HdbscanOracleResult {
  Labeling labels;  // per raw id
  std::vector<EquivalenceClass> classes;
  std::vector<std::int32_t> chosen;
  double total_score = 0.0;
  Dendrogram dendro;
  WeightedGraph mst;  // vertices are representative ids
  DuplicateGroups groups;
};

HdbscanOracleResult hdbscan_star_oracle(const PointSet& ps, std::uint64_t k, std::uint64_t m,
                                        std::size_t cap = 20000, bool exclude_root = false);

}  // namespace cubeclust
