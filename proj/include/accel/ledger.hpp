#pragma once

#include <array>
#include <cstdint>

namespace accel {

enum class Level : int { outer = 0, inner = 1 };
enum class Part : int { f = 0, g = 1 };
enum class Kind : int { value = 0, full_grad = 1, coord_grad = 2, hessian = 3 };

// Weighted oracle accounting. Coordinate-gradient calls count 1 unit; full
// gradients and Hessians count weight_full units each (default 2.5, the
// measured full-to-coordinate cost ratio on the benchmark instances; it is a
// knob, not re-measured). Value calls are tracked but excluded from weighted
// totals: they serve instrumentation, not the oracle model being compared.
class OracleLedger {
public:
  double weight_full = 2.5;

  void add(Level lvl, Part part, Kind kind, std::int64_t n = 1) {
    counts_[idx(lvl)][idx(part)][idx(kind)] += n;
  }

  std::int64_t count(Level lvl, Part part, Kind kind) const {
    return counts_[idx(lvl)][idx(part)][idx(kind)];
  }

  std::int64_t part_total(Part part, Kind kind) const {
    return count(Level::outer, part, kind) + count(Level::inner, part, kind);
  }

  double weighted(Part part) const {
    return static_cast<double>(part_total(part, Kind::coord_grad)) +
           weight_full * static_cast<double>(part_total(part, Kind::full_grad) +
                                             part_total(part, Kind::hessian));
  }

  double weighted_total() const { return weighted(Part::f) + weighted(Part::g); }

  void merge(const OracleLedger& other) {
    for (int l = 0; l < 2; ++l)
      for (int p = 0; p < 2; ++p)
        for (int k = 0; k < 4; ++k) counts_[l][p][k] += other.counts_[l][p][k];
  }

  void reset() { counts_ = {}; }

private:
  static int idx(Level v) { return static_cast<int>(v); }
  static int idx(Part v) { return static_cast<int>(v); }
  static int idx(Kind v) { return static_cast<int>(v); }

  std::array<std::array<std::array<std::int64_t, 4>, 2>, 2> counts_{};
};

}  // namespace accel
