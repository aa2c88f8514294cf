#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cubeclust {

// Deterministic random helpers. std::mt19937_64 output is fully specified by
// the standard; the standard *distributions* are not, so the mappings to
// uniform/normal live here to keep generated datasets identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n) by rejection, bias-free.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t lim = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= lim);
    return v % n;
  }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cubeclust
