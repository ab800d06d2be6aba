#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "wavekit/numgrid.hpp"

namespace testing {

// Seeded generators for the property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::complex<double> complex_unit() { return {uniform(-1, 1), uniform(-1, 1)}; }

  wavekit::WaveField field(const wavekit::Grid& g, bool walls_zero = true) {
    wavekit::WaveField f(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      f[i] = walls_zero && !g.is_active(i) ? std::complex<double>{} : complex_unit();
    }
    return f;
  }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs_diff(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
