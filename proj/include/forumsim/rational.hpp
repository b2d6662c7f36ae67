#pragma once

#include <cstdint>
#include <string>

#include <boost/rational.hpp>

namespace forumsim {

/// Exact arithmetic for every metric. Denominators stay tiny (agent count,
/// opportunity count, trial count) so 64-bit parts never come close to
/// overflowing.
using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline Rational abs(const Rational& r) { return r < 0 ? -r : r; }

/// Fixed-point rendering with round-half-even, computed exactly from the
/// rational (no floating point involved).
std::string format_decimal(const Rational& r, int places = 4);

/// Fixed-point rendering of a double with round-half-even on its exact binary
/// value.
std::string format_decimal(double v, int places = 4);

}  // namespace forumsim
