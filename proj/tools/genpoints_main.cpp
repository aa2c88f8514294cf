#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cubeclust/errors.hpp"
#include "cubeclust/io.hpp"
#include "cubeclust/points.hpp"
#include "cubeclust/rng.hpp"

namespace {

using namespace cubeclust;

PointSet gen_uniform(Rng& rng, std::size_t count, std::size_t dim, double extent) {
  PointSet ps;
  ps.dim = dim;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t d = 0; d < dim; ++d) ps.coords.push_back(rng.uniform(0.0, extent));
  return ps;
}

PointSet gen_blobs(Rng& rng, std::size_t count, std::size_t dim, double extent,
                   std::size_t centers, double sigma, double noise_frac, double min_sep) {
  PointSet ps;
  ps.dim = dim;
  std::vector<double> c;
  c.reserve(centers * dim);
  std::vector<double> cand(dim);
  for (std::size_t b = 0; b < centers; ++b) {
    // rejection keeps settlements apart; gives up after enough tries so odd
    // parameter choices still terminate
    for (int tries = 0; tries < 10000; ++tries) {
      for (std::size_t d = 0; d < dim; ++d) cand[d] = rng.uniform(0.0, extent);
      bool ok = true;
      for (std::size_t o = 0; ok && o < b; ++o) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = cand[d] - c[o * dim + d];
          s += diff * diff;
        }
        ok = s >= min_sep * min_sep;
      }
      if (ok || tries == 9999) break;
    }
    c.insert(c.end(), cand.begin(), cand.end());
  }
  const std::size_t noise = static_cast<std::size_t>(noise_frac * static_cast<double>(count));
  for (std::size_t i = 0; i < count; ++i) {
    if (i < noise) {
      for (std::size_t d = 0; d < dim; ++d) ps.coords.push_back(rng.uniform(0.0, extent));
    } else {
      const std::size_t b = i % centers;
      for (std::size_t d = 0; d < dim; ++d)
        ps.coords.push_back(c[b * dim + d] + sigma * rng.normal());
    }
  }
  return ps;
}

}  // namespace

int main(int argc, char** argv) {
  std::string kind = "blobs";
  std::string out_path = "points.csv";
  std::size_t count = 1000;
  std::size_t dim = 2;
  std::uint64_t seed = 1;
  double extent = 100.0;
  double sigma = 2.0;
  double noise_frac = 0.05;
  std::size_t centers = 0;

  CLI::App app{"seeded synthetic point sets"};
  app.add_option("--kind", kind, "uniform, blobs or towns")
      ->check(CLI::IsMember({"uniform", "blobs", "towns"}));
  app.add_option("--count", count, "number of points");
  app.add_option("--dim", dim, "dimension (2..6)");
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--extent", extent, "domain edge length");
  app.add_option("--sigma", sigma, "spread around each center");
  app.add_option("--noise-frac", noise_frac, "fraction of uniform background points");
  app.add_option("--centers", centers, "center count (default: count/200, at least 2)");
  app.add_option("--out", out_path, "output csv path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cubeclust::kExitParam;
  }

  try {
    Rng rng(seed);
    if (dim < 2 || dim > 6) cubeclust::fail_param("dim must be in [2, 6]");
    if (centers == 0) centers = std::max<std::size_t>(2, count / 200);
    PointSet ps;
    if (kind == "uniform") {
      ps = gen_uniform(rng, count, dim, extent);
    } else if (kind == "blobs") {
      ps = gen_blobs(rng, count, dim, extent, centers, sigma, noise_frac, 0.0);
    } else {  // towns: compact settlements kept well apart on a wide domain
      ps = gen_blobs(rng, count, dim, extent, centers, sigma, noise_frac, 10.0 * sigma);
    }
    std::string text;
    for (std::size_t i = 0; i < ps.count(); ++i) {
      for (std::size_t d = 0; d < ps.dim; ++d) {
        if (d) text += ',';
        text += format_double(ps.row(static_cast<PointId>(i))[d]);
      }
      text += '\n';
    }
    write_text_file(out_path, text);
    std::cout << "wrote " << ps.count() << " points to " << out_path << "\n";
    return 0;
  } catch (const cubeclust::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
