#pragma once

#include <string>
#include <vector>

#include "cubeclust/dbscan.hpp"
#include "cubeclust/points.hpp"
#include "cubeclust/staged.hpp"

namespace cubeclust {

// Comma-separated numeric rows, one point per row. A first row with any
// non-numeric field is treated as a header and skipped; every later problem
// aborts with a parse error naming the 1-based file row.
PointSet parse_points_csv(const std::string& text);
PointSet read_points_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// point_id,cluster rows; noise stays -1.
std::string labels_to_csv(const Labeling& labels);

// phase,metric,value rows.
struct ReportRow {
  std::string phase;
  std::string metric;
  std::string value;
};

std::string report_to_csv(const std::vector<ReportRow>& rows);

// Per-pass shrinkage metrics. with_timing adds wall-clock rows; leave it off
// when comparing runs byte for byte.
std::vector<ReportRow> stage_report_rows(const std::vector<StageReport>& reports,
                                         bool with_timing);

// Flat clustering metrics, same layout.
std::vector<ReportRow> dbscan_report_rows(double eps, int k, std::size_t cluster_count,
                                          const DistanceCounters& counters, double seconds,
                                          bool with_timing);

// Scatter plot of a 2-d labeling: clusters cycle a fixed palette, noise is
// gray. Deterministic byte-for-byte for equal inputs.
std::string labels_to_svg(const PointSet& ps, const Labeling& labels);

}  // namespace cubeclust
