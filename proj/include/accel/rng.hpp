#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace accel {

/// Deterministic random source. std::mt19937_64 has a portable bit stream,
// but the std distributions do not, so the mappings to doubles live here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // [0, 1), 53-bit resolution
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller; the spare is cached so draws come in a fixed sequence
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // unbiased integer in [lo, hi] via rejection
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = (UINT64_MAX / range) * range;
    std::uint64_t v = 0;
    do {
      v = eng_();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % range);
  }

  // index draw from a cumulative weight table (strictly increasing, last = total)
  std::size_t sample_cumulative(const std::vector<double>& cum) {
    const double u = uniform() * cum.back();
    std::size_t lo = 0, hi = cum.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cum[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace accel
