#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cubeclust/dbscan.hpp"
#include "cubeclust/errors.hpp"
#include "cubeclust/hierarchy.hpp"
#include "cubeclust/io.hpp"
#include "cubeclust/staged.hpp"

namespace {

using namespace cubeclust;

struct Options {
  std::string algorithm = "dbscan-star";
  std::string input;
  std::string labels_path = "labels.csv";
  std::string report_path;
  std::string svg_path;
  double eps = 0.0;
  std::vector<double> schedule;
  int k = 0;
  std::int64_t min_cluster_size = 0;  // 0: default to k
  int workers = 1;
  std::size_t oracle_cap = 20000;
  bool exclude_root = false;
  bool early_stop = false;
  bool timing = false;
  bool suggest_schedule = false;
};

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t noise_count(const Labeling& labels) {
  std::size_t n = 0;
  for (std::int32_t l : labels.cluster) n += l < 0;
  return n;
}

std::size_t cluster_count(const Labeling& labels) {
  std::int32_t top = -1;
  for (std::int32_t l : labels.cluster) top = std::max(top, l);
  return static_cast<std::size_t>(top + 1);
}

// k-th neighbor distance quantiles over a deterministic subsample; a quick
// way to pick slice scales that are neither trivial nor all-merging.
std::vector<double> suggest_schedule(const PointSet& ps, std::uint64_t k, int workers) {
  if (ps.count() < 2 || ps.count() - 1 < k) fail_param("insufficient points: need more than k points");
  const std::size_t target = 2000;
  const std::size_t stride = std::max<std::size_t>(1, ps.count() / target);
  std::vector<PointId> sample;
  for (std::size_t i = 0; i < ps.count(); i += stride) sample.push_back(static_cast<PointId>(i));
  std::vector<PointId> all(ps.count());
  for (std::size_t i = 0; i < ps.count(); ++i) all[i] = static_cast<PointId>(i);
  const CoreDistances cores = core_distances(sample, all, ps, k, nullptr, workers);
  std::vector<double> d;
  d.reserve(cores.core2.size());
  for (double c2 : cores.core2) d.push_back(std::sqrt(c2));
  std::sort(d.begin(), d.end());
  std::vector<double> out;
  for (double q : {0.50, 0.75, 0.90}) {
    const double v = d[std::min(d.size() - 1, static_cast<std::size_t>(q * (d.size() - 1)))];
    if (v > 0.0 && (out.empty() || v > out.back())) out.push_back(v);
  }
  if (out.empty()) fail_param("cannot suggest scales: sampled neighbor distances are all zero");
  return out;
}

// first id whose labels differ under the two canonical labelings
void check_agreement(const Labeling& got, const Labeling& want, const std::string& what) {
  if (got.cluster == want.cluster) return;
  for (std::size_t i = 0; i < got.cluster.size(); ++i)
    if (got.cluster[i] != want.cluster[i])
      throw Error(kExitMismatch, what + ": first mismatch at point " + std::to_string(i) +
                                     " (got " + std::to_string(got.cluster[i]) + ", reference " +
                                     std::to_string(want.cluster[i]) + ")");
  throw Error(kExitMismatch, what + ": label vectors differ in length");
}

int run(const Options& opt) {
  const PointSet ps = read_points_csv(opt.input);
  if (opt.suggest_schedule) {
    const std::vector<double> s = suggest_schedule(ps, static_cast<std::uint64_t>(opt.k), opt.workers);
    std::string line;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) line += ',';
      line += format_double(s[i]);
    }
    std::cout << line << "\n";
    return kExitOk;
  }

  const std::uint64_t m =
      opt.min_cluster_size > 0 ? static_cast<std::uint64_t>(opt.min_cluster_size)
                               : static_cast<std::uint64_t>(opt.k);
  Labeling labels;
  std::vector<ReportRow> report;
  const auto t0 = std::chrono::steady_clock::now();

  if (opt.algorithm == "dbscan-star" || opt.algorithm == "dbscan") {
    DbscanOutput out = s_dbscan_star(ps, opt.eps, opt.k, opt.workers);
    DistanceCounters counters = out.counters;
    if (opt.algorithm == "dbscan") {
      std::uint64_t border_evals = 0;
      labels = assign_borders(ps, out, opt.eps, border_evals);
      counters.border += border_evals;
    } else {
      labels = out.labels;
    }
    report = dbscan_report_rows(opt.eps, opt.k, out.cluster_count, counters, now_seconds(t0),
                                opt.timing);
  } else if (opt.algorithm == "hdbscan-star") {
    if (opt.schedule.empty()) fail_param("hdbscan-star needs --eps-schedule");
    StagedResult res = s_hdbscan_star(ps, static_cast<std::uint64_t>(opt.k), m, opt.schedule,
                                      opt.workers, opt.exclude_root, opt.early_stop);
    labels = res.labels;
    report = stage_report_rows(res.reports, opt.timing);
  } else if (opt.algorithm == "oracle-check") {
    if (!opt.schedule.empty()) {
      StagedResult res = s_hdbscan_star(ps, static_cast<std::uint64_t>(opt.k), m, opt.schedule,
                                        opt.workers, opt.exclude_root, false);
      const HdbscanOracleResult ref = hdbscan_star_oracle(ps, static_cast<std::uint64_t>(opt.k), m,
                                                          opt.oracle_cap, opt.exclude_root);
      check_agreement(res.labels, ref.labels, "hierarchy labels");
      labels = res.labels;
      report = stage_report_rows(res.reports, opt.timing);
    } else {
      DbscanOutput out = s_dbscan_star(ps, opt.eps, opt.k, opt.workers);
      check_agreement(out.labels,
                      dbscan_star_oracle(ps, opt.eps, static_cast<std::uint64_t>(opt.k),
                                         opt.oracle_cap),
                      "core clustering");
      std::uint64_t border_evals = 0;
      const Labeling with_borders = assign_borders(ps, out, opt.eps, border_evals);
      check_agreement(with_borders,
                      dbscan_oracle(ps, opt.eps, static_cast<std::uint64_t>(opt.k), opt.oracle_cap),
                      "border clustering");
      labels = with_borders;
      DistanceCounters counters = out.counters;
      counters.border += border_evals;
      report = dbscan_report_rows(opt.eps, opt.k, out.cluster_count, counters, now_seconds(t0),
                                  opt.timing);
    }
    std::cout << "oracle agreement\n";
  } else {
    fail_param("unknown algorithm " + opt.algorithm);
  }

  write_text_file(opt.labels_path, labels_to_csv(labels));
  if (!opt.report_path.empty()) write_text_file(opt.report_path, report_to_csv(report));
  if (!opt.svg_path.empty()) write_text_file(opt.svg_path, labels_to_svg(ps, labels));
  std::cout << "points: " << ps.count() << "  clusters: " << cluster_count(labels)
            << "  noise: " << noise_count(labels) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"density clustering over cube-lattice decompositions"};
  app.add_option("--algorithm", opt.algorithm, "dbscan-star, dbscan, hdbscan-star or oracle-check")
      ->check(CLI::IsMember({"dbscan-star", "dbscan", "hdbscan-star", "oracle-check"}));
  app.add_option("--input", opt.input, "points csv")->required();
  app.add_option("--eps", opt.eps, "slice radius for the flat algorithms");
  app.add_option("--eps-schedule", opt.schedule, "ascending radii for the staged hierarchy")
      ->delimiter(',');
  app.add_option("--k", opt.k, "neighbor count threshold")->required();
  app.add_option("--min-cluster-size", opt.min_cluster_size,
                 "minimum weight of a persistent cluster (default: k)");
  app.add_option("--workers", opt.workers, "worker threads");
  app.add_option("--oracle-cap", opt.oracle_cap, "largest size the brute-force reference accepts");
  app.add_flag("--exclude-root", opt.exclude_root, "never select a root class");
  app.add_flag("--early-stop", opt.early_stop, "skip the finishing pass (approximate hierarchy)");
  app.add_flag("--timing", opt.timing, "include wall-clock rows in the report");
  app.add_flag("--suggest-schedule", opt.suggest_schedule,
               "print neighbor-distance quantiles usable as --eps-schedule and exit");
  app.add_option("--labels", opt.labels_path, "labels csv output path");
  app.add_option("--report", opt.report_path, "metrics csv output path");
  app.add_option("--svg", opt.svg_path, "scatter plot output path (2-d inputs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cubeclust::kExitParam;
  }

  try {
    return run(opt);
  } catch (const cubeclust::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cubeclust::kExitParam;
  }
}
