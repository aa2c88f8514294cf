#pragma once

#include <cstdint>
#include <vector>

#include "cubeclust/dbscan.hpp"
#include "cubeclust/graph.hpp"
#include "cubeclust/grid.hpp"
#include "cubeclust/hierarchy.hpp"
#include "cubeclust/points.hpp"

namespace cubeclust {

// Near-boundary survivor sets of one clustering pass: j keeps the n_const-ring
// of every cluster's boundary cubes (restricted to the cluster) plus all
// noise; f keeps the wider N_const-ring plus noise. f is the next iterate:
// dropping cluster interiors beyond that margin never changes any later
// reachability among the survivors.
struct JFSets {
  std::vector<PointId> j;
  std::vector<PointId> f;
};

JFSets j_f_sets(const Labeling& labels, const std::vector<PointId>& y_ids, const CubeMap& map);

// Mutual-reachability spanning tree of one cluster, with core distances taken
// against the reference set R: all points of the iterate within the
// m_const-ring of the cluster's cubes. R covers every eps-ball around the
// cluster, so cores and reach weights among members equal their values over
// the whole iterate.
struct PerClusterGraph {
  WeightedGraph tree;                   // spans C; weights are reach distances <= eps
  CoreDistances cores;                  // squared core distances for members of C
  std::vector<PointId> reference_ids;   // R
  std::uint64_t distance_evals = 0;
};

PerClusterGraph per_cluster_graph(const std::vector<PointId>& cluster, const CubeMap& ymap,
                                  const PointSet& ps, double eps, std::uint64_t k,
                                  const std::vector<std::uint32_t>* mult = nullptr);

// One row of the shrinkage report.
struct StageReport {
  int index = 0;          // 1-based pass number; 0 marks the finishing pass
  double eps = 0.0;
  std::size_t x_size = 0;        // points entering the pass
  std::size_t cluster_count = 0;
  std::size_t j_size = 0;
  std::size_t f_size = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> tree_sizes;  // per cluster (|C|, |R|)
  double seconds = 0.0;
};

// Rolling state of the staged construction. x always holds the next iterate;
// h_edges accumulates the union of per-cluster trees with squared weights.
struct IterationState {
  const PointSet* ps = nullptr;
  std::uint64_t k = 0;
  int workers = 1;
  std::vector<std::uint32_t> weights;  // per global id; empty means all 1

  int index = 0;       // completed passes
  double eps = 0.0;    // scale of the last completed pass
  std::vector<PointId> universe;     // ids the construction started from, ascending
  std::vector<PointId> x;            // current iterate, ascending
  Labeling labels;                   // clusters of the last pass, per global id
  std::size_t cluster_count = 0;
  std::vector<Edge> h_edges;         // accumulated tree edges, w holds SQUARED weight
  std::vector<double> core2_first;   // per id: squared core at first cluster membership (NaN unset)
  std::vector<StageReport> reports;
};

IterationState begin_staged(const PointSet& ps, std::uint64_t k, int workers,
                            std::vector<PointId> ids,
                            std::vector<std::uint32_t> weights = {});

// Runs one pass at eps_next: clusters the iterate, records first-membership
// core distances, unions the per-cluster trees into the accumulator (new
// edges only: heavier than the previous scale and not yet connected), then
// shrinks the iterate to boundary margins plus noise.
void advance_iteration(IterationState& st, double eps_next);

// Finishing pass: exact core distances and a spanning tree over the final
// iterate at unbounded scale, merged into the accumulator. Returns the
// combined graph; its components at any threshold match the full-set
// mutual-reachability graph's.
WeightedGraph finalize_staged(IterationState& st);

struct StagedResult {
  Labeling labels;  // per raw id
  std::vector<EquivalenceClass> classes;
  std::vector<std::int32_t> chosen;
  double total_score = 0.0;
  Dendrogram dendro;
  WeightedGraph final_graph;  // vertices are representative ids
  DuplicateGroups groups;
  std::vector<StageReport> reports;
  bool approximate = false;  // true when early_stop skipped the finishing pass
};

// Full pipeline: collapse duplicates, run every scheduled pass, finish (or
// stop early), then condense, score and select on the combined graph.
StagedResult s_hdbscan_star(const PointSet& ps, std::uint64_t k, std::uint64_t m,
                            const std::vector<double>& schedule, int workers,
                            bool exclude_root = false, bool early_stop = false);

}  // namespace cubeclust
