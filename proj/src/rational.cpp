#include "forumsim/rational.hpp"

#include <cmath>
#include <cstdio>

namespace forumsim {

std::string format_decimal(const Rational& r, int places) {
  std::int64_t scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;

  const bool negative = r < 0;
  const Rational mag = negative ? -r : r;
  const std::int64_t num = mag.numerator();
  const std::int64_t den = mag.denominator();

  // scaled = num * scale / den, split so the product cannot overflow.
  const std::int64_t whole = num / den;
  const std::int64_t rem = num % den;
  std::int64_t q = whole * scale + (rem * scale) / den;
  const std::int64_t r2 = (rem * scale) % den;
  // Compare the leftover fraction r2/den with 1/2.
  if (2 * r2 > den || (2 * r2 == den && (q % 2) == 1)) ++q;

  const std::int64_t int_part = q / scale;
  const std::int64_t frac_part = q % scale;
  std::string out = (negative && q != 0) ? "-" : "";
  out += std::to_string(int_part);
  if (places > 0) {
    std::string frac = std::to_string(frac_part);
    out += '.';
    out += std::string(static_cast<std::size_t>(places) - frac.size(), '0');
    out += frac;
  }
  return out;
}

std::string format_decimal(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  std::string out = buf;
  // "-0.0000" reads badly in tables.
  if (out.size() > 1 && out[0] == '-' && out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

}  // namespace forumsim
