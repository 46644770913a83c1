#include "coarse/quadratic.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "coarse/error.hpp"

namespace coarse {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw Error(Errc::budget_exhausted, "exact quadratic arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

u128 isqrt(u128 n) {
  u128 r = static_cast<u128>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

i128 floor_div(i128 a, i128 c) {
  i128 q = a / c;
  if ((a % c != 0) && ((a < 0) != (c < 0))) --q;
  return q;
}

// ⌊b√D⌋ for b != 0 and non-square D.
i128 floor_root(i128 b, std::int64_t D) {
  u128 mag = static_cast<u128>(b < 0 ? -b : b);
  u128 s = isqrt(mag * mag * static_cast<u128>(D));
  return b > 0 ? static_cast<i128>(s) : -static_cast<i128>(s) - 1;
}

int sign_of(i128 m, i128 n, std::int64_t D) {
  if (n == 0 || D == 0) return (m > 0) - (m < 0);
  if (m >= 0 && n > 0) return 1;
  if (m <= 0 && n < 0) return -1;
  i128 lhs = m * m, rhs = n * n * D;
  int s = (lhs > rhs) - (lhs < rhs);
  return m > 0 ? s : -s;
}

}  // namespace

QuadField::QuadField(std::int64_t D) : D_(D) {
  if (D < 0) throw Error(Errc::invalid_argument, "quadratic field needs D >= 0");
  if (D > 0) {
    auto r = static_cast<std::int64_t>(isqrt(static_cast<u128>(D)));
    if (r * r == D) throw Error(Errc::invalid_argument, "quadratic field needs a non-square D");
  }
}

Quad QuadField::make(std::int64_t a, std::int64_t b, std::int64_t c) const {
  if (c == 0) throw Error(Errc::invalid_argument, "zero denominator");
  if (D_ == 0) b = 0;
  if (c < 0) {
    a = -a;
    b = -b;
    c = -c;
  }
  i128 g = gcd128(gcd128(a, b), c);
  return Quad{narrow(a / g), narrow(b / g), narrow(c / g)};
}

Quad QuadField::add(const Quad& x, const Quad& y) const {
  i128 c = static_cast<i128>(x.c) * y.c;
  i128 a = static_cast<i128>(x.a) * y.c + static_cast<i128>(y.a) * x.c;
  i128 b = static_cast<i128>(x.b) * y.c + static_cast<i128>(y.b) * x.c;
  i128 g = gcd128(gcd128(a, b), c);
  return make(narrow(a / g), narrow(b / g), narrow(c / g));
}

Quad QuadField::sub(const Quad& x, const Quad& y) const { return add(x, neg(y)); }

Quad QuadField::scale(const Quad& x, std::int64_t k) const {
  i128 a = static_cast<i128>(x.a) * k, b = static_cast<i128>(x.b) * k;
  i128 g = gcd128(gcd128(a, b), x.c);
  if (g == 0) return make(0, 0, 1);
  return make(narrow(a / g), narrow(b / g), narrow(x.c / g));
}

Quad QuadField::inverse(const Quad& x) const {
  if (x.a == 0 && x.b == 0) throw Error(Errc::invalid_argument, "inverse of zero");
  // c / (a + b√D) = c(a − b√D) / (a² − b²D)
  i128 den = static_cast<i128>(x.a) * x.a - static_cast<i128>(x.b) * x.b * D_;
  i128 a = static_cast<i128>(x.c) * x.a, b = -static_cast<i128>(x.c) * x.b;
  i128 g = gcd128(gcd128(a, b), den);
  return make(narrow(a / g), narrow(b / g), narrow(den / g));
}

std::int64_t QuadField::floor(const Quad& x) const {
  if (x.b == 0) return narrow(floor_div(x.a, x.c));
  return narrow(floor_div(static_cast<i128>(x.a) + floor_root(x.b, D_), x.c));
}

Quad QuadField::frac(const Quad& x) const {
  std::int64_t f = floor(x);
  return make(narrow(static_cast<i128>(x.a) - static_cast<i128>(f) * x.c), x.b, x.c);
}

int QuadField::sign(const Quad& x) const { return sign_of(x.a, x.b, D_); }

std::int64_t QuadField::dyadic_floor(const Quad& x, unsigned bits) const {
  i128 m = static_cast<i128>(1) << bits;
  i128 a = m * x.a, b = m * x.b;
  if (b == 0) return narrow(floor_div(a, x.c));
  return narrow(floor_div(a + floor_root(b, D_), x.c));
}

double QuadField::approx(const Quad& x) const {
  return (static_cast<double>(x.a) + static_cast<double>(x.b) * std::sqrt(static_cast<double>(D_))) /
         static_cast<double>(x.c);
}

std::vector<Rational> convergents(const QuadField& field, Quad x, std::size_t count) {
  std::vector<Rational> out;
  i128 p2 = 0, q2 = 1, p1 = 1, q1 = 0;
  for (std::size_t k = 0; k < count; ++k) {
    std::int64_t a = field.floor(x);
    i128 p = a * p1 + p2, q = a * q1 + q2;
    out.emplace_back(narrow(p), narrow(q));
    p2 = p1;
    q2 = q1;
    p1 = p;
    q1 = q;
    Quad rest = field.sub(x, field.make(a, 0, 1));
    if (rest.a == 0 && rest.b == 0) break;
    x = field.inverse(rest);
  }
  return out;
}

}  // namespace coarse
