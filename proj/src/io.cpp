#include "cubeclust/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cubeclust/errors.hpp"

namespace cubeclust {
namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  for (std::string& l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  return lines;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

bool parse_field(const std::string& s, double& out) {
  const char* b = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(b, &end);
  if (end == b) return false;
  while (*end == ' ' || *end == '\t') ++end;
  if (*end != '\0') return false;
  out = v;
  return true;
}

bool try_parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string field =
        comma == std::string::npos ? line.substr(start) : line.substr(start, comma - start);
    double v = 0.0;
    if (!parse_field(field, v)) return false;
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return true;
}

}  // namespace

PointSet parse_points_csv(const std::string& text) {
  PointSet ps;
  std::vector<double> row;
  bool header_allowed = true;  // only until the first non-blank row
  bool dim_set = false;
  std::size_t lineno = 0;
  for (const std::string& line : split_lines(text)) {
    ++lineno;
    if (blank(line)) continue;
    if (!try_parse_row(line, row)) {
      if (header_allowed) {  // header row
        header_allowed = false;
        continue;
      }
      fail_parse("row " + std::to_string(lineno) + ": non-numeric value");
    }
    header_allowed = false;
    for (double v : row)
      if (!std::isfinite(v))
        fail_parse("row " + std::to_string(lineno) + ": non-finite coordinate");
    if (!dim_set) {
      ps.dim = row.size();
      dim_set = true;
    } else if (row.size() != ps.dim) {
      fail_parse("row " + std::to_string(lineno) + ": expected " + std::to_string(ps.dim) +
                 " values, got " + std::to_string(row.size()));
    }
    ps.coords.insert(ps.coords.end(), row.begin(), row.end());
  }
  if (ps.coords.empty()) ps.dim = 0;
  return ps;
}

PointSet read_points_csv(const std::string& path) { return parse_points_csv(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_param("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_param("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) fail_param("failed writing " + path);
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::string labels_to_csv(const Labeling& labels) {
  std::string out = "point_id,cluster\n";
  for (std::size_t i = 0; i < labels.cluster.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += std::to_string(labels.cluster[i]);
    out += '\n';
  }
  return out;
}

std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = "phase,metric,value\n";
  for (const ReportRow& r : rows) {
    out += r.phase;
    out += ',';
    out += r.metric;
    out += ',';
    out += r.value;
    out += '\n';
  }
  return out;
}

std::vector<ReportRow> stage_report_rows(const std::vector<StageReport>& reports,
                                         bool with_timing) {
  std::vector<ReportRow> rows;
  for (const StageReport& r : reports) {
    const std::string phase = r.index == 0 ? "final" : "pass" + std::to_string(r.index);
    auto add = [&](const char* metric, std::string value) {
      rows.push_back({phase, metric, std::move(value)});
    };
    add("eps", format_double(r.eps));
    add("x_size", std::to_string(r.x_size));
    if (r.index != 0) {
      add("cluster_count", std::to_string(r.cluster_count));
      add("j_size", std::to_string(r.j_size));
      add("f_size", std::to_string(r.f_size));
    }
    std::uint32_t cmax = 0;
    std::uint32_t rmax = 0;
    for (const auto& t : r.tree_sizes) {
      cmax = std::max(cmax, t.first);
      rmax = std::max(rmax, t.second);
    }
    add("tree_count", std::to_string(r.tree_sizes.size()));
    add("tree_members_max", std::to_string(cmax));
    add("tree_reference_max", std::to_string(rmax));
    if (with_timing) add("seconds", format_double(r.seconds));
  }
  return rows;
}

std::vector<ReportRow> dbscan_report_rows(double eps, int k, std::size_t cluster_count,
                                          const DistanceCounters& counters, double seconds,
                                          bool with_timing) {
  std::vector<ReportRow> rows;
  auto add = [&](const char* metric, std::string value) {
    rows.push_back({"clustering", metric, std::move(value)});
  };
  add("eps", format_double(eps));
  add("k", std::to_string(k));
  add("cluster_count", std::to_string(cluster_count));
  add("core_scan_evals", std::to_string(counters.core_scan));
  add("dense_merge_evals", std::to_string(counters.dense_merge));
  add("border_evals", std::to_string(counters.border));
  add("total_evals", std::to_string(counters.total()));
  if (with_timing) add("seconds", format_double(seconds));
  return rows;
}

std::string labels_to_svg(const PointSet& ps, const Labeling& labels) {
  if (ps.dim != 2) fail_param("svg output needs 2-d points");
  if (labels.cluster.size() != ps.count()) fail_param("labels do not align with points");
  static const char* const kPalette[] = {"#e6194b", "#3cb44b", "#f58231", "#4363d8",
                                         "#911eb4", "#46c5c5", "#f032e6", "#96a820",
                                         "#a05c50", "#008080", "#9a6324", "#800000"};
  constexpr int kColors = 12;
  constexpr double kSize = 800.0;
  constexpr double kMargin = 40.0;

  double minx = 0.0, maxx = 0.0, miny = 0.0, maxy = 0.0;
  for (PointId i = 0; i < ps.count(); ++i) {
    const double* p = ps.row(i);
    if (i == 0) {
      minx = maxx = p[0];
      miny = maxy = p[1];
    } else {
      minx = std::min(minx, p[0]);
      maxx = std::max(maxx, p[0]);
      miny = std::min(miny, p[1]);
      maxy = std::max(maxy, p[1]);
    }
  }
  const double span = kSize - 2 * kMargin;
  auto place = [&](double v, double lo, double hi) {
    return hi > lo ? kMargin + (v - lo) / (hi - lo) * span : kSize / 2;
  };

  std::string out;
  out +=
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
      "viewBox=\"0 0 800 800\">\n<rect width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";
  char buf[128];
  for (PointId i = 0; i < ps.count(); ++i) {
    const double* p = ps.row(i);
    const double cx = place(p[0], minx, maxx);
    const double cy = kSize - place(p[1], miny, maxy);  // svg y grows downward
    const std::int32_t l = labels.cluster[i];
    const char* fill = l < 0 ? "#9e9e9e" : kPalette[l % kColors];
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", cx,
                  cy, fill);
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cubeclust
