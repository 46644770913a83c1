#pragma once

#include <cstdint>
#include <vector>

#include "coarse/rational.hpp"

namespace coarse {

// Exact arithmetic in Q(√D): values (a + b√D)/c with c > 0 and gcd(a, b, c) = 1. D is 0 (plain
// rationals, b = 0) or a positive non-square. Intermediate overflow throws budget_exhausted.
struct Quad {
  std::int64_t a = 0, b = 0, c = 1;
  friend bool operator==(const Quad&, const Quad&) = default;
};

class QuadField {
 public:
  explicit QuadField(std::int64_t D = 0);

  std::int64_t D() const { return D_; }
  Quad make(std::int64_t a, std::int64_t b, std::int64_t c) const;
  Quad from(const Rational& q) const { return make(q.numerator(), 0, q.denominator()); }
  Quad add(const Quad& x, const Quad& y) const;
  Quad sub(const Quad& x, const Quad& y) const;
  Quad neg(const Quad& x) const { return make(-x.a, -x.b, x.c); }
  Quad scale(const Quad& x, std::int64_t k) const;
  Quad inverse(const Quad& x) const;  // x != 0
  std::int64_t floor(const Quad& x) const;
  Quad frac(const Quad& x) const;  // x − ⌊x⌋, in [0, 1)
  int sign(const Quad& x) const;
  int compare(const Quad& x, const Quad& y) const { return sign(sub(x, y)); }
  bool is_rational(const Quad& x) const { return x.b == 0; }
  bool is_integer(const Quad& x) const { return x.b == 0 && x.c == 1; }
  // ⌊2^bits · x⌋ for x in [0, 1).
  std::int64_t dyadic_floor(const Quad& x, unsigned bits) const;
  double approx(const Quad& x) const;

 private:
  std::int64_t D_;
};

// Convergents p_k/q_k of the continued fraction of x, k = 0..count−1.
std::vector<Rational> convergents(const QuadField& field, Quad x, std::size_t count);

}  // namespace coarse
