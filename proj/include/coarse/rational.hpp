#pragma once

#include <cstdint>
#include <string>

#include <boost/rational.hpp>

namespace coarse {

using Rational = boost::rational<std::int64_t>;

// "p/q" or "p"; throws Error(parse_error).
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);

inline std::int64_t floor_of(const Rational& q) {
  std::int64_t n = q.numerator(), d = q.denominator();
  std::int64_t f = n / d;
  if ((n % d != 0) && (n < 0)) --f;
  return f;
}

inline std::int64_t ceil_of(const Rational& q) { return -floor_of(-q); }

// a <= q for integer a and rational q, without overflow-prone conversions.
inline bool le(std::int64_t a, const Rational& q) { return a * q.denominator() <= q.numerator(); }

}  // namespace coarse
