#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cubeclust/detail/union_find.hpp"
#include "cubeclust/graph.hpp"
#include "cubeclust/hierarchy.hpp"
#include "cubeclust/points.hpp"
#include "cubeclust/rng.hpp"

namespace testutil {

using namespace cubeclust;

inline PointSet uniform_cloud(Rng& rng, std::size_t count, std::size_t dim, double extent) {
  PointSet ps;
  ps.dim = dim;
  for (std::size_t i = 0; i < count * dim; ++i) ps.coords.push_back(rng.uniform(0.0, extent));
  return ps;
}

inline PointSet blob_cloud(Rng& rng, std::size_t count, std::size_t dim, std::size_t blobs,
                           double extent, double sigma, double noise_frac) {
  PointSet ps;
  ps.dim = dim;
  std::vector<double> centers(blobs * dim);
  for (double& v : centers) v = rng.uniform(0.0, extent);
  const std::size_t noise = static_cast<std::size_t>(noise_frac * static_cast<double>(count));
  for (std::size_t i = 0; i < count; ++i) {
    if (i < noise) {
      for (std::size_t d = 0; d < dim; ++d) ps.coords.push_back(rng.uniform(0.0, extent));
    } else {
      const std::size_t b = i % blobs;
      for (std::size_t d = 0; d < dim; ++d)
        ps.coords.push_back(centers[b * dim + d] + sigma * rng.normal());
    }
  }
  return ps;
}

// blobs, uniform or a mix; shapes vary with the rng so suites cover both
// crowded and sparse geometry
inline PointSet random_instance(Rng& rng, std::size_t count, std::size_t dim) {
  const std::uint64_t shape = rng.below(3);
  if (shape == 0) return uniform_cloud(rng, count, dim, 40.0);
  const std::size_t blobs = 2 + rng.below(6);
  const double sigma = 0.5 + 3.0 * rng.uniform01();
  const double noise_frac = 0.2 * rng.uniform01();
  return blob_cloud(rng, count, dim, blobs, 60.0, sigma, shape == 1 ? noise_frac : 0.0);
}

// duplicates some existing rows verbatim so collapsed-multiplicity paths run
inline void add_duplicates(Rng& rng, PointSet& ps, std::size_t clones) {
  const std::size_t base = ps.count();
  if (base == 0) return;
  for (std::size_t i = 0; i < clones; ++i) {
    const PointId src = static_cast<PointId>(rng.below(base));
    ps.add(ps.row(src));
  }
}

// quantile of the pairwise distances, subsampled deterministically when the
// instance has more pairs than max_pairs
inline double distance_quantile(const PointSet& ps, Rng& rng, double q,
                                std::size_t max_pairs = 200000) {
  const std::size_t n = ps.count();
  std::vector<double> d;
  if (n < 2) return 1.0;
  const std::size_t pairs = n * (n - 1) / 2;
  if (pairs <= max_pairs) {
    d.reserve(pairs);
    for (PointId i = 0; i < n; ++i)
      for (PointId j = i + 1; j < n; ++j) d.push_back(dist(ps, i, j));
  } else {
    d.reserve(max_pairs);
    for (std::size_t t = 0; t < max_pairs; ++t) {
      const PointId i = static_cast<PointId>(rng.below(n));
      PointId j = static_cast<PointId>(rng.below(n - 1));
      if (j >= i) ++j;
      d.push_back(dist(ps, i, j));
    }
  }
  std::sort(d.begin(), d.end());
  double v = d[std::min(d.size() - 1, static_cast<std::size_t>(q * (d.size() - 1)))];
  if (v <= 0.0) v = d.back() > 0.0 ? d.back() : 1.0;
  return v;
}

// quantile of the k-th neighbor distances (brute force)
inline double knn_quantile(const PointSet& ps, std::uint64_t k, double q) {
  std::vector<PointId> ids(ps.count());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<PointId>(i);
  const CoreDistances cores = core_distances(ids, ids, ps, k);
  std::vector<double> d;
  d.reserve(cores.core2.size());
  for (double c2 : cores.core2) d.push_back(std::sqrt(c2));
  std::sort(d.begin(), d.end());
  return d[std::min(d.size() - 1, static_cast<std::size_t>(q * (d.size() - 1)))];
}

// canonical component labels (smallest member first) of vertices under the
// edges with w <= alpha already applied through uf
inline std::vector<std::int32_t> partition_tokens(UnionFind& uf, std::size_t n) {
  std::vector<std::int32_t> label(n, -1);
  std::int32_t next = 0;
  std::vector<std::int32_t> of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (of_root[r] < 0) of_root[r] = next++;
    label[i] = of_root[r];
  }
  return label;
}

struct SliceCompare {
  bool ok = true;
  double alpha = 0.0;
  std::string what;
};

// Exhaustive threshold-sweep equality: the component partition of either
// graph only changes at its own edge weights, so comparing immediately after
// every weight in the union of both weight sets (plus the all-singleton
// start) covers every alpha >= 0.
inline SliceCompare compare_all_slices(const WeightedGraph& a, const WeightedGraph& b) {
  SliceCompare res;
  if (a.vertices != b.vertices) {
    res.ok = false;
    res.what = "vertex sets differ";
    return res;
  }
  const std::size_t n = a.vertices.size();
  std::vector<std::uint32_t> dense_of;  // vertex id -> dense index
  {
    PointId top = n ? a.vertices.back() : 0;
    dense_of.assign(static_cast<std::size_t>(top) + 1, 0);
    for (std::size_t i = 0; i < n; ++i) dense_of[a.vertices[i]] = static_cast<std::uint32_t>(i);
  }
  auto by_weight = [](const Edge& x, const Edge& y) {
    if (x.w != y.w) return x.w < y.w;
    if (x.u != y.u) return x.u < y.u;
    return x.v < y.v;
  };
  std::vector<Edge> ea = a.edges;
  std::vector<Edge> eb = b.edges;
  std::sort(ea.begin(), ea.end(), by_weight);
  std::sort(eb.begin(), eb.end(), by_weight);
  std::vector<double> events;
  for (const Edge& e : ea) events.push_back(e.w);
  for (const Edge& e : eb) events.push_back(e.w);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  UnionFind ua(n);
  UnionFind ub(n);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (double w : events) {
    while (ia < ea.size() && ea[ia].w <= w) {
      ua.unite(dense_of[ea[ia].u], dense_of[ea[ia].v]);
      ++ia;
    }
    while (ib < eb.size() && eb[ib].w <= w) {
      ub.unite(dense_of[eb[ib].u], dense_of[eb[ib].v]);
      ++ib;
    }
    if (partition_tokens(ua, n) != partition_tokens(ub, n)) {
      res.ok = false;
      res.alpha = w;
      res.what = "partitions differ at threshold " + std::to_string(w);
      return res;
    }
  }
  return res;
}

// order-free canonical form of an equivalence class for cross-pipeline
// comparison: support, life interval and score
struct ClassKey {
  std::vector<PointId> support;
  double birth = 0.0;
  double end = 0.0;
  double score = 0.0;
};

inline bool close_rel(double a, double b, double tol) {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= tol * scale;
}

inline std::vector<ClassKey> class_keys(const std::vector<EquivalenceClass>& classes,
                                        const std::vector<std::int32_t>* only = nullptr) {
  std::vector<ClassKey> keys;
  for (const EquivalenceClass& c : classes) {
    if (only && !std::binary_search(only->begin(), only->end(), c.id)) continue;
    ClassKey k;
    k.support = c.support;
    std::sort(k.support.begin(), k.support.end());
    k.birth = c.birth;
    k.end = c.end;
    k.score = c.score;
    keys.push_back(std::move(k));
  }
  std::sort(keys.begin(), keys.end(), [](const ClassKey& x, const ClassKey& y) {
    if (x.support != y.support) return x.support < y.support;
    return x.birth < y.birth;
  });
  return keys;
}

inline bool same_class_keys(const std::vector<ClassKey>& a, const std::vector<ClassKey>& b,
                            double tol, std::string* why) {
  if (a.size() != b.size()) {
    if (why) *why = "class counts differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].support != b[i].support) {
      if (why) *why = "class " + std::to_string(i) + ": supports differ";
      return false;
    }
    if (a[i].birth != b[i].birth || a[i].end != b[i].end) {
      if (why) *why = "class " + std::to_string(i) + ": life intervals differ";
      return false;
    }
    if (!close_rel(a[i].score, b[i].score, tol)) {
      if (why) *why = "class " + std::to_string(i) + ": scores differ";
      return false;
    }
  }
  return true;
}

}  // namespace testutil
