// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line on stdout; the exit code is nonzero when any criterion fails. Progress
// notes go to stderr so timeouts are diagnosable.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cubeclust/dbscan.hpp"
#include "cubeclust/graph.hpp"
#include "cubeclust/grid.hpp"
#include "cubeclust/hierarchy.hpp"
#include "cubeclust/io.hpp"
#include "cubeclust/points.hpp"
#include "cubeclust/region.hpp"
#include "cubeclust/rng.hpp"
#include "cubeclust/staged.hpp"
#include "testutil.hpp"

namespace {

using namespace cubeclust;
using testutil::add_duplicates;
using testutil::blob_cloud;
using testutil::class_keys;
using testutil::close_rel;
using testutil::compare_all_slices;
using testutil::distance_quantile;
using testutil::knn_quantile;
using testutil::random_instance;
using testutil::same_class_keys;
using testutil::uniform_cloud;

struct Outcome {
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
};

// records the first failure only; later ones usually cascade from it
void flag(Outcome& o, const std::string& what) {
  if (!o.pass) return;
  o.pass = false;
  o.detail = what;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string count_str(std::uint64_t v) { return std::to_string(v); }

// squared k-th nearest neighbor distance per point, by direct selection;
// written independently of the library's own scan
std::vector<double> brute_core2(const PointSet& ps, std::uint64_t k) {
  const std::size_t n = ps.count();
  std::vector<double> out(n, 0.0);
  std::vector<double> row;
  row.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(dist2(ps, static_cast<PointId>(i), static_cast<PointId>(j)));
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    out[i] = row[k - 1];
  }
  return out;
}

// ---------------------------------------------------------------------------
// criteria 1 and 5: the grid pipeline reproduces the all-pairs clustering, and
// the core-set / edge-set characterizations hold on the same instances
// ---------------------------------------------------------------------------
void check_flat_exactness(Outcome& exact, Outcome& charac) {
  Rng rng(0x5eedc0de01ull);
  const std::uint64_t k_cycle[4] = {1, 3, 10, 25};
  const double q_cycle[5] = {0.10, 0.25, 0.50, 0.75, 0.90};
  const int sets = 40;
  const int combos = 5;
  std::size_t done = 0;

  for (int s = 0; s < sets; ++s) {
    // sizes spread log-uniformly over [50, 5000]
    const auto count =
        static_cast<std::size_t>(std::lround(50.0 * std::pow(100.0, s / 39.0)));
    const std::size_t dim = 2 + (s % 2);
    const PointSet ps = random_instance(rng, count, dim);
    const std::size_t n = ps.count();
    std::unordered_map<std::uint64_t, std::vector<double>> core_cache;

    for (int c = 0; c < combos; ++c) {
      const std::uint64_t k = k_cycle[(s + c) % 4];
      const double eps = distance_quantile(ps, rng, q_cycle[c]);
      const double eps2 = eps * eps;
      const int workers = 1 + (s * combos + c) % 4;

      const DbscanOutput out = s_dbscan_star(ps, eps, static_cast<int>(k), workers);
      const Labeling ref = dbscan_star_oracle(ps, eps, k);
      if (out.labels.cluster != ref.cluster)
        flag(exact, "set " + std::to_string(s) + " combo " + std::to_string(c) +
                        ": partitions differ");

      // degree of each point in the eps-distance graph
      std::vector<std::uint32_t> deg(n, 0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (dist2(ps, static_cast<PointId>(i), static_cast<PointId>(j)) <= eps2) {
            ++deg[i];
            ++deg[j];
          }

      const std::vector<std::uint8_t> core_ref = core_points_oracle(ps, eps, k);
      if (out.is_core != core_ref)
        flag(charac, "set " + std::to_string(s) + " combo " + std::to_string(c) +
                         ": core flags differ from the all-pairs scan");

      auto cached = core_cache.find(k);
      if (cached == core_cache.end())
        cached = core_cache.emplace(k, brute_core2(ps, k)).first;
      const std::vector<double>& core2 = cached->second;

      // three equivalent core-set forms: pipeline flag, ball population,
      // k-th neighbor distance
      for (std::size_t i = 0; i < n && charac.pass; ++i) {
        const bool flagged = out.is_core[i] != 0;
        const bool by_deg = static_cast<std::uint64_t>(deg[i]) >= k;
        const bool by_knn = core2[i] <= eps2;
        if (flagged != by_deg || flagged != by_knn)
          flag(charac, "set " + std::to_string(s) + " combo " + std::to_string(c) +
                           ": core characterizations disagree at point " + std::to_string(i));
      }

      // the eps-slice of the reachability graph must carry exactly the edges
      // of the degree-filtered eps-distance graph
      for (std::size_t i = 0; i < n && charac.pass; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double d2 = dist2(ps, static_cast<PointId>(i), static_cast<PointId>(j));
          const double r2 = std::max({core2[i], core2[j], d2});
          const bool by_reach = r2 <= eps2;
          const bool by_filter = d2 <= eps2 &&
                                 static_cast<std::uint64_t>(deg[i]) >= k &&
                                 static_cast<std::uint64_t>(deg[j]) >= k;
          if (by_reach != by_filter) {
            flag(charac, "set " + std::to_string(s) + " combo " + std::to_string(c) +
                             ": edge sets differ at pair (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
            break;
          }
        }
      }
      ++done;
    }
    std::fprintf(stderr, "[acceptance] flat exactness: %zu/%d instances\n", done,
                 sets * combos);
  }

  if (exact.pass)
    exact.detail = count_str(done) + " randomized instances: grid clustering equals the "
                                     "all-pairs reconstruction exactly";
  if (charac.pass)
    charac.detail = "core flags match ball-population and k-distance forms; reachability "
                    "slices equal degree-filtered distance slices on all " +
                    count_str(done) + " instances";
}

// ---------------------------------------------------------------------------
// criteria 2 and 3: every threshold slice of the staged graph partitions the
// points like the direct reachability graph, and the staged pipeline's final
// selection equals the single-shot reference
// ---------------------------------------------------------------------------
void check_staged_agreement(Outcome& sweep, Outcome& endtoend) {
  Rng rng(0x5eedc0de02ull);
  const int instances = 50;

  for (int t = 0; t < instances; ++t) {
    const std::size_t base = 120 + rng.below(780);
    const std::size_t dim = 2 + (t % 2);
    PointSet ps = random_instance(rng, base, dim);
    if (t % 5 == 2) add_duplicates(rng, ps, base / 10);

    const std::uint64_t k = 3 + rng.below(6);
    const std::uint64_t m = 4 + rng.below(8);
    const std::size_t len = 1 + (t % 3);
    std::vector<double> qs;
    for (std::size_t i = 0; i < len; ++i) qs.push_back(rng.uniform(0.15, 0.85));
    std::sort(qs.begin(), qs.end());
    std::vector<double> schedule;
    for (double q : qs) {
      double e = knn_quantile(ps, k, q);
      if (e <= 0.0) e = 1e-6;
      if (!schedule.empty() && e <= schedule.back()) e = schedule.back() * 1.3 + 0.1;
      schedule.push_back(e);
    }
    const int workers = 1 + (t % 4);

    const StagedResult got = s_hdbscan_star(ps, k, m, schedule, workers);

    // direct reachability graph over the same representatives
    const DuplicateGroups groups = merge_duplicates(ps);
    std::vector<std::uint32_t> weight_by_id;
    const std::vector<std::uint32_t>* mult = nullptr;
    if (!groups.trivial()) {
      weight_by_id.assign(ps.count(), 1);
      for (std::size_t g = 0; g < groups.rep.size(); ++g)
        weight_by_id[groups.rep[g]] = groups.mult[g];
      mult = &weight_by_id;
    }
    const std::vector<PointId>& universe = got.final_graph.vertices;
    const CoreDistances cores = core_distances(universe, universe, ps, k, mult);
    const WeightedGraph ref_graph = mutual_reach_graph(universe, ps, cores);
    const testutil::SliceCompare cmp = compare_all_slices(got.final_graph, ref_graph);
    if (!cmp.ok) flag(sweep, "instance " + std::to_string(t) + ": " + cmp.what);

    const HdbscanOracleResult ref = hdbscan_star_oracle(ps, k, m);
    std::string why;
    if (got.labels.cluster != ref.labels.cluster)
      flag(endtoend, "instance " + std::to_string(t) + ": final labels differ");
    if (!same_class_keys(class_keys(got.classes), class_keys(ref.classes), 1e-9, &why))
      flag(endtoend, "instance " + std::to_string(t) + ": " + why);
    if (!same_class_keys(class_keys(got.classes, &got.chosen),
                         class_keys(ref.classes, &ref.chosen), 1e-9, &why))
      flag(endtoend, "instance " + std::to_string(t) + ": chosen sets: " + why);
    if (!close_rel(got.total_score, ref.total_score, 1e-9))
      flag(endtoend, "instance " + std::to_string(t) + ": total scores differ");

    if ((t + 1) % 10 == 0)
      std::fprintf(stderr, "[acceptance] staged agreement: %d/%d instances\n", t + 1,
                   instances);
  }

  if (sweep.pass)
    sweep.detail = count_str(instances) + " instances: point partitions of every threshold "
                                          "slice match the direct reachability graph";
  if (endtoend.pass)
    endtoend.detail = count_str(instances) + " instances: staged selection equals the "
                                             "single-shot pipeline (scores within 1e-9 "
                                             "relative)";
}

// ---------------------------------------------------------------------------
// criterion 4: cube-region guarantees that justify dropping interiors
// ---------------------------------------------------------------------------
void check_region_guarantees(Outcome& o) {
  Rng rng(0x5eedc0de03ull);
  const int trials = 110;
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t clustered = 0;

  for (int t = 0; t < trials && o.pass; ++t) {
    const std::size_t dim = 2 + (t % 2);
    const std::size_t count = 60 + rng.below(441);
    const PointSet ps = random_instance(rng, count, dim);
    const std::size_t n = ps.count();
    const double eps = distance_quantile(ps, rng, rng.uniform(0.03, 0.25));
    const double eps2 = eps * eps;
    const GridParams params = derive_constants(dim, eps);
    const CubeMap map = build_cube_map(ps, params);

    // random proper nonempty subset of the points
    std::vector<PointId> a_ids;
    std::vector<char> in_a(n, 0);
    const double frac = rng.uniform(0.2, 0.8);
    for (std::size_t i = 0; i < n; ++i)
      if (rng.uniform01() < frac) {
        a_ids.push_back(static_cast<PointId>(i));
        in_a[i] = 1;
      }
    if (a_ids.empty()) {
      a_ids.push_back(0);
      in_a[0] = 1;
    }
    if (a_ids.size() == n) {
      in_a[a_ids.back()] = 0;
      a_ids.pop_back();
    }

    const RegionView view = classify_cubes(a_ids, map);
    const std::vector<PointId> rim_near =
        restrict_region(view, RegionPart::Boundary, params.n_const, true).ids;
    const std::vector<PointId> rim_own =
        restrict_region(view, RegionPart::Boundary, 0, true).ids;

    // (a) for every outside point, some member within n_const rings of the
    // boundary is at least as close as the best member anywhere
    for (std::size_t x = 0; x < n && o.pass; ++x) {
      if (in_a[x]) continue;
      double best_any = inf;
      for (PointId p : a_ids)
        best_any = std::min(best_any, dist2(ps, p, static_cast<PointId>(x)));
      double best_rim = inf;
      for (PointId a : rim_near)
        best_rim = std::min(best_rim, dist2(ps, a, static_cast<PointId>(x)));
      if (!(best_rim <= best_any))
        flag(o, "trial " + std::to_string(t) +
                    ": near-boundary member not distance-minimal for point " +
                    std::to_string(x));
    }

    // (b) members deeper than n_const + r rings are strictly farther from any
    // outside point than the best boundary member, by more than r cube sides
    for (int r : {0, 1, 3}) {
      if (!o.pass) break;
      const std::vector<PointId> ring_ids =
          restrict_region(view, RegionPart::Boundary, params.n_const + r, true).ids;
      std::vector<PointId> deep;
      std::set_difference(a_ids.begin(), a_ids.end(), ring_ids.begin(), ring_ids.end(),
                          std::back_inserter(deep));
      if (deep.empty()) continue;
      for (std::size_t x = 0; x < n && o.pass; ++x) {
        if (in_a[x]) continue;
        double best_rim2 = inf;
        for (PointId a : rim_own)
          best_rim2 = std::min(best_rim2, dist2(ps, a, static_cast<PointId>(x)));
        const double bound = std::sqrt(best_rim2) + r * params.side;
        for (PointId p : deep)
          if (!(dist2(ps, p, static_cast<PointId>(x)) > bound * bound)) {
            flag(o, "trial " + std::to_string(t) + ": deep member within " +
                        std::to_string(r) + " sides of the boundary optimum");
            break;
          }
      }
    }

    // (c) extending the whole region r rings equals interior plus the
    // extended boundary, as lattice key sets
    std::vector<CubeKey> closure_keys, interior_keys, boundary_keys;
    for (std::uint32_t cell : view.cells) closure_keys.push_back(map.keys[cell]);
    for (std::uint32_t cell : view.interior_cells) interior_keys.push_back(map.keys[cell]);
    for (std::uint32_t cell : view.boundary_cells) boundary_keys.push_back(map.keys[cell]);
    for (int r : {0, 1, params.m_const, params.N_const}) {
      if (!o.pass) break;
      const Extension whole = extend_region(closure_keys, r, map);
      const Extension rim = extend_region(boundary_keys, r, map);
      std::vector<CubeKey> merged;
      std::set_union(interior_keys.begin(), interior_keys.end(), rim.keys.begin(),
                     rim.keys.end(), std::back_inserter(merged));
      if (whole.keys != merged)
        flag(o, "trial " + std::to_string(t) + ": region extension by " + std::to_string(r) +
                    " rings is not interior plus extended boundary");
    }

    // (d) every point within eps of the subset lies in the interior or the
    // m_const-ring of the boundary
    const std::vector<PointId> int_ids =
        restrict_region(view, RegionPart::Interior, 0, true).ids;
    const std::vector<PointId> rim_wide =
        restrict_region(view, RegionPart::Boundary, params.m_const, false).ids;
    for (std::size_t x = 0; x < n && o.pass; ++x) {
      double d2a = inf;
      for (PointId p : a_ids) d2a = std::min(d2a, dist2(ps, p, static_cast<PointId>(x)));
      if (d2a > eps2) continue;
      const auto px = static_cast<PointId>(x);
      if (!std::binary_search(int_ids.begin(), int_ids.end(), px) &&
          !std::binary_search(rim_wide.begin(), rim_wide.end(), px))
        flag(o, "trial " + std::to_string(t) + ": point " + std::to_string(x) +
                    " within eps of the subset escapes interior + wide boundary ring");
    }
    if (!o.pass) break;

    // (e) one clustering pass: survivor-set core distances equal whole-set
    // core distances for every kept point, bitwise
    const std::uint64_t k = 3 + static_cast<std::uint64_t>(t % 4);
    const DbscanOutput run = s_dbscan_star(ps, eps, static_cast<int>(k), 1 + (t % 4));
    std::vector<PointId> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<PointId>(i);
    const JFSets jf = j_f_sets(run.labels, all, run.map);
    if (jf.f.size() > k) {
      const CoreDistances in_f = core_distances(jf.j, jf.f, ps, k);
      const CoreDistances in_y = core_distances(jf.j, all, ps, k);
      if (in_f.core2 != in_y.core2)
        flag(o, "trial " + std::to_string(t) +
                    ": core distances change when the iterate is restricted");
    }
    if (run.cluster_count > 0) ++clustered;

    // (f) reach from a cluster to any point outside it is minimized through
    // the cluster's near-boundary ring
    const CoreDistances cores_all = core_distances(all, all, ps, k);
    auto reach2 = [&](PointId p, PointId q) {
      return std::max({cores_all.core2[p], cores_all.core2[q], dist2(ps, p, q)});
    };
    for (std::size_t c = 0; c < run.cluster_count && o.pass; ++c) {
      std::vector<PointId> members;
      for (std::size_t i = 0; i < n; ++i)
        if (run.labels.cluster[i] == static_cast<std::int32_t>(c))
          members.push_back(static_cast<PointId>(i));
      const RegionView cv = classify_cubes(members, run.map);
      const std::vector<PointId> rim =
          restrict_region(cv, RegionPart::Boundary, params.n_const, true).ids;
      for (std::size_t x = 0; x < n && o.pass; ++x) {
        if (run.labels.cluster[x] == static_cast<std::int32_t>(c)) continue;
        double best = inf;
        for (PointId a : rim) best = std::min(best, reach2(a, static_cast<PointId>(x)));
        for (PointId p : members)
          if (!(reach2(p, static_cast<PointId>(x)) >= best)) {
            flag(o, "trial " + std::to_string(t) + ": cluster " + std::to_string(c) +
                        " reaches point " + std::to_string(x) + " past its boundary ring");
            break;
          }
      }
    }

    if ((t + 1) % 25 == 0)
      std::fprintf(stderr, "[acceptance] region guarantees: %d/%d trials\n", t + 1, trials);
  }

  if (o.pass && clustered < 20)
    flag(o, "only " + count_str(clustered) + " trials produced clusters; coverage too thin");
  if (o.pass)
    o.detail = count_str(trials) + " randomized regions: boundary-distance, ring-union, "
                                   "ball-cover, survivor-core and cluster-rim guarantees "
                                   "all hold (" +
               count_str(clustered) + " trials with clusters)";
}

// ---------------------------------------------------------------------------
// criterion 6: category shortcuts remove distance work
// ---------------------------------------------------------------------------
void check_dense_shortcuts(Outcome& o) {
  // a filled block whose cubes are all over-full: merges ride the cube
  // adjacency graph, so no point pair is ever measured
  PointSet block;
  block.dim = 2;
  const double eps_block = 2.0 * std::sqrt(2.0);  // cube side exactly 1
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) block.add({i + 0.5, j + 0.5});
  const DbscanOutput one = s_dbscan_star(block, eps_block, 3, 1);
  if (one.counters.total() != 0)
    flag(o, "filled block measured " + count_str(one.counters.total()) + " point pairs");
  if (one.cluster_count != 1) flag(o, "filled block split into " +
                                         count_str(one.cluster_count) + " clusters");
  for (std::size_t i = 0; i < block.count() && o.pass; ++i)
    if (one.labels.cluster[i] != 0) flag(o, "filled block left a point out");

  // doubling the radius on a uniform cloud moves most cubes from scanned to
  // over-full, so the distance-evaluation count must drop
  Rng rng(0x5eedc0de06ull);
  const PointSet cloud = uniform_cloud(rng, 100000, 2, 1000.0);
  const DbscanOutput lo = s_dbscan_star(cloud, 8.0, 10, 1);
  const DbscanOutput hi = s_dbscan_star(cloud, 16.0, 10, 1);
  if (!(hi.counters.total() < lo.counters.total()))
    flag(o, "doubling the radius did not reduce distance evaluations (" +
                count_str(lo.counters.total()) + " -> " + count_str(hi.counters.total()) +
                ")");

  if (o.pass)
    o.detail = "filled block: 0 distance evaluations; 100000-point cloud: " +
               count_str(lo.counters.total()) + " -> " + count_str(hi.counters.total()) +
               " evaluations when the radius doubles";
}

// ---------------------------------------------------------------------------
// criterion 7: staged passes shrink the iterate on a layered instance
// ---------------------------------------------------------------------------

// ~110 disk-shaped towns in three density tiers plus thin background noise.
// A tier's towns first become clusters at that tier's scheduled radius: the
// lattice spacing keeps neighbor counts at or below 9 at every smaller radius
// and near 100 at the town's own radius, with k = 10 splitting the two.
PointSet layered_towns(std::uint64_t seed) {
  Rng rng(seed);
  PointSet ps;
  ps.dim = 2;
  const double tier_eps[3] = {1.0, 4.0, 16.0};
  const double grid_step = 160.0;  // keeps towns farther apart than any merge reach
  int town = 0;
  for (int gy = 0; gy < 10; ++gy)
    for (int gx = 0; gx < 11; ++gx, ++town) {
      const double eps = tier_eps[town % 3];
      const double spacing = eps / (4.0 * std::sqrt(2.0));  // half a cube side
      const double radius = 3.0 * eps;
      const double cx = 80.0 + grid_step * gx;
      const double cy = 80.0 + grid_step * gy;
      const long steps = std::lround(std::ceil(radius / spacing));
      for (long ix = -steps; ix <= steps; ++ix)
        for (long iy = -steps; iy <= steps; ++iy) {
          const double x = static_cast<double>(ix) * spacing;
          const double y = static_cast<double>(iy) * spacing;
          if (x * x + y * y > radius * radius) continue;
          // jitter below spacing/4 keeps every point inside its own cell
          const double jx = (rng.uniform01() - 0.5) * 0.5 * spacing;
          const double jy = (rng.uniform01() - 0.5) * 0.5 * spacing;
          ps.add({cx + x + jx, cy + y + jy});
        }
    }
  const std::size_t sprawl = ps.count() / 100;
  for (std::size_t i = 0; i < sprawl; ++i)
    ps.add({rng.uniform(0.0, 11 * grid_step), rng.uniform(0.0, 10 * grid_step)});
  return ps;
}

void check_shrinkage(Outcome& o) {
  const PointSet ps = layered_towns(0x5eedc0de07ull);
  std::fprintf(stderr, "[acceptance] shrinkage: %zu points, 3 passes\n", ps.count());
  const std::vector<double> schedule = {1.0, 4.0, 16.0};
  const StagedResult got = s_hdbscan_star(ps, 10, 20, schedule, 1);

  if (got.approximate) flag(o, "pipeline reported an approximate result");
  if (got.reports.size() != schedule.size() + 1)
    flag(o, "expected one report row per pass plus the finish, got " +
                count_str(got.reports.size()));

  std::string trail;
  std::size_t max_ref = 0;
  for (std::size_t i = 0; i + 1 < got.reports.size() && o.pass; ++i) {
    const StageReport& rep = got.reports[i];
    if (rep.cluster_count == 0)
      flag(o, "pass " + std::to_string(i + 1) + " produced no clusters");
    if (!(got.reports[i + 1].x_size < rep.x_size))
      flag(o, "pass " + std::to_string(i + 1) + " did not shrink the iterate (" +
                  count_str(rep.x_size) + " -> " + count_str(got.reports[i + 1].x_size) +
                  ")");
    for (const auto& [members, reference] : rep.tree_sizes) {
      if (reference >= rep.x_size || reference >= ps.count())
        flag(o, "pass " + std::to_string(i + 1) + " used a reference set of " +
                    count_str(reference) + " points; no locality gain");
      max_ref = std::max<std::size_t>(max_ref, reference);
      (void)members;
    }
  }
  if (o.pass) {
    for (const StageReport& rep : got.reports)
      trail += (trail.empty() ? "" : " -> ") + count_str(rep.x_size);
    o.detail = "iterate sizes " + trail + " strictly decreasing; largest per-cluster "
                                          "reference set " +
               count_str(max_ref) + " of " + count_str(ps.count()) + " points";
  }
}

// ---------------------------------------------------------------------------
// criterion 8: byte-identical outputs across worker counts and reruns
// ---------------------------------------------------------------------------
std::string flat_blob(const PointSet& ps, double eps, int k, int workers) {
  const DbscanOutput out = s_dbscan_star(ps, eps, k, workers);
  std::string blob = labels_to_csv(out.labels);
  blob += report_to_csv(
      dbscan_report_rows(eps, k, out.cluster_count, out.counters, 0.0, false));
  std::uint64_t border_evals = 0;
  const Labeling with_borders = assign_borders(ps, out, eps, border_evals);
  blob += labels_to_csv(with_borders);
  blob += count_str(border_evals);
  blob += '\n';
  if (ps.dim == 2) blob += labels_to_svg(ps, out.labels);
  return blob;
}

std::string staged_blob(const PointSet& ps, std::uint64_t k, std::uint64_t m,
                        const std::vector<double>& schedule, int workers) {
  const StagedResult got = s_hdbscan_star(ps, k, m, schedule, workers);
  std::string blob = labels_to_csv(got.labels);
  blob += report_to_csv(stage_report_rows(got.reports, false));
  blob += format_double(got.total_score);
  blob += '\n';
  for (std::int32_t c : got.chosen) {
    blob += std::to_string(c);
    blob += ',';
  }
  blob += '\n';
  for (const Edge& e : got.final_graph.edges) {
    blob += std::to_string(e.u);
    blob += ' ';
    blob += std::to_string(e.v);
    blob += ' ';
    blob += format_double(e.w);
    blob += '\n';
  }
  return blob;
}

void check_determinism(Outcome& o) {
  Rng rng(0x5eedc0de08ull);
  struct Case {
    PointSet ps;
    double eps;
    int k;
    std::uint64_t m;
    std::vector<double> schedule;
  };
  std::vector<Case> cases;
  {
    Case a;
    a.ps = blob_cloud(rng, 4000, 2, 5, 60.0, 2.0, 0.1);
    a.eps = distance_quantile(a.ps, rng, 0.15);
    a.k = 8;
    a.m = 15;
    double e1 = knn_quantile(a.ps, 8, 0.3);
    double e2 = knn_quantile(a.ps, 8, 0.7);
    if (e2 <= e1) e2 = e1 * 1.3 + 0.1;
    a.schedule = {e1, e2};
    cases.push_back(std::move(a));
    Case b;
    b.ps = uniform_cloud(rng, 2500, 3, 40.0);
    b.eps = distance_quantile(b.ps, rng, 0.2);
    b.k = 6;
    b.m = 10;
    b.schedule = {knn_quantile(b.ps, 6, 0.5)};
    cases.push_back(std::move(b));
  }

  for (std::size_t ci = 0; ci < cases.size() && o.pass; ++ci) {
    const Case& c = cases[ci];
    const std::string flat_base = flat_blob(c.ps, c.eps, c.k, 1);
    const std::string staged_base =
        staged_blob(c.ps, static_cast<std::uint64_t>(c.k), c.m, c.schedule, 1);
    for (int w : {1, 4}) {
      for (int rep = 0; rep < 2 && o.pass; ++rep) {
        if (flat_blob(c.ps, c.eps, c.k, w) != flat_base)
          flag(o, "case " + std::to_string(ci) + ": flat outputs differ at " +
                      std::to_string(w) + " workers, run " + std::to_string(rep));
        if (staged_blob(c.ps, static_cast<std::uint64_t>(c.k), c.m, c.schedule, w) !=
            staged_base)
          flag(o, "case " + std::to_string(ci) + ": staged outputs differ at " +
                      std::to_string(w) + " workers, run " + std::to_string(rep));
      }
    }
    std::fprintf(stderr, "[acceptance] determinism: case %zu done\n", ci);
  }

  if (o.pass)
    o.detail = "flat and staged pipelines byte-identical across worker counts {1,4} "
               "and repeat runs on both test cases";
}

}  // namespace

int main() {
  Outcome oc[8];

  // criteria 1+5 and 2+3 share their instance loops
  const double t0 = now_seconds();
  std::fprintf(stderr, "[acceptance] criteria 1 and 5\n");
  {
    const double t = now_seconds();
    check_flat_exactness(oc[0], oc[4]);
    oc[0].seconds = oc[4].seconds = now_seconds() - t;
  }
  std::fprintf(stderr, "[acceptance] criteria 2 and 3\n");
  {
    const double t = now_seconds();
    check_staged_agreement(oc[1], oc[2]);
    oc[1].seconds = oc[2].seconds = now_seconds() - t;
  }
  std::fprintf(stderr, "[acceptance] criterion 4\n");
  {
    const double t = now_seconds();
    check_region_guarantees(oc[3]);
    oc[3].seconds = now_seconds() - t;
  }
  std::fprintf(stderr, "[acceptance] criterion 6\n");
  {
    const double t = now_seconds();
    check_dense_shortcuts(oc[5]);
    oc[5].seconds = now_seconds() - t;
  }
  std::fprintf(stderr, "[acceptance] criterion 7\n");
  {
    const double t = now_seconds();
    check_shrinkage(oc[6]);
    oc[6].seconds = now_seconds() - t;
  }
  std::fprintf(stderr, "[acceptance] criterion 8\n");
  {
    const double t = now_seconds();
    check_determinism(oc[7]);
    oc[7].seconds = now_seconds() - t;
  }

  bool all = true;
  for (int i = 0; i < 8; ++i) {
    std::printf("criterion %d: %s - %s (%.1fs)\n", i + 1, oc[i].pass ? "PASS" : "FAIL",
                oc[i].detail.c_str(), oc[i].seconds);
    all = all && oc[i].pass;
  }
  std::printf(all ? "acceptance: all 8 criteria passed (%.1fs total)\n"
                  : "acceptance: at least one criterion FAILED (%.1fs total)\n",
              now_seconds() - t0);
  return all ? 0 : 1;
}
