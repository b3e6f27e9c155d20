#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rlfit {

using Vec = std::vector<double>;

/// Closed parameter interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Admissible parameter domain, one interval per parameter.
using Domain = std::vector<Interval>;

bool in_domain(const Vec& x, const Domain& omega);

/// 64-bit FNV-1a, used to salt RNG substreams and to hash configs.
std::uint64_t fnv1a64(std::string_view data);

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

}  // namespace rlfit
