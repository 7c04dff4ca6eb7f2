#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spca {

// Seeded random source with explicit uniform/normal extraction. We do not use
// std::uniform_real_distribution or std::normal_distribution because their
// output differs between standard library implementations; every draw here is
// a pure function of the mt19937_64 stream, so a seed pins the result.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, pairs cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    // Guard the log: push 0 up to the smallest representable draw.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform point on the unit sphere in R^r (Gaussian-normalize method).
  std::vector<double> unit_vector(std::size_t r) {
    std::vector<double> v(r);
    while (true) {
      double ss = 0.0;
      for (auto& x : v) {
        x = normal();
        ss += x * x;
      }
      if (ss > 1e-24) {
        const double inv = 1.0 / std::sqrt(ss);
        for (auto& x : v) x *= inv;
        return v;
      }
    }
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spca
