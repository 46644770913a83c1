#include <cstdlib>
#include <functional>
#include <map>
#include <random>

#include "coarse/cqi.hpp"
#include "coarse/error.hpp"
#include "coarse/spaces.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace coarse;

namespace {

using Fn = std::function<std::int64_t(std::int64_t)>;

struct Line {
  std::unique_ptr<LazyGraph> z = make_lattice(1, {.horizon = 700});
  Point at(std::int64_t x) const { return z->at(Key{x}); }
  std::int64_t val(Point p) const { return z->key(p)[0]; }
  Window window(std::int64_t radius) const { return Window(*z, z->root(), radius); }
  PointSet select(const Window& w, const std::function<bool(std::int64_t)>& keep) const {
    std::vector<Point> out;
    for (Point p : w.points())
      if (keep(val(p))) out.push_back(p);
    return make_set(out);
  }
  PartialBijection map(const PointSet& dom, const Fn& f) const {
    std::vector<std::pair<Point, Point>> pairs;
    for (Point p : dom) pairs.emplace_back(p, at(f(val(p))));
    return PartialBijection(pairs);
  }
  PointMap total(const Window& w, const Fn& f) const {
    PointMap out;
    for (Point p : w.points()) out.emplace(p, at(f(val(p))));
    return out;
  }
  std::vector<std::int64_t> values(const PointSet& s) const {
    std::vector<std::int64_t> out;
    for (const Key& k : canonical_keys(*z, s)) out.push_back(k[0]);
    return out;
  }
};

std::int64_t floor_div2(std::int64_t x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

// Direct check of the bi-Lipschitz inequality on line values.
bool oracle_bilip(const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs, std::int64_t C) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      std::int64_t a = std::llabs(pairs[i].first - pairs[j].first);
      std::int64_t b = std::llabs(pairs[i].second - pairs[j].second);
      if (b > C * a || a > C * b) return false;
    }
  }
  return true;
}

std::vector<std::pair<std::int64_t, std::int64_t>> as_values(const Line& l, const PartialBijection& f) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (auto [x, y] : f.pairs()) out.emplace_back(l.val(x), l.val(y));
  return out;
}

// Every value in [lo,hi] within K of the set.
bool oracle_net(const std::vector<std::int64_t>& s, std::int64_t lo, std::int64_t hi, std::int64_t K) {
  for (std::int64_t x = lo; x <= hi; ++x) {
    bool near = false;
    for (std::int64_t a : s) near = near || std::llabs(a - x) <= K;
    if (!near) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("greedy separated net on a line window") {
  Line l;
  Window w = l.window(20);
  PointSet a = separated_net(w, 2, l.at(0));
  std::vector<std::int64_t> expected;
  for (std::int64_t x = -18; x <= 18; x += 3) expected.push_back(x);
  CHECK(l.values(a) == expected);
  auto v = l.values(a);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) CHECK(v[i + 1] - v[i] > 2);
  CHECK(oracle_net(v, -20, 20, 2));

  PointSet b = separated_net(w, 1, l.at(5));
  CHECK(contains(b, l.at(5)));
  CHECK(oracle_net(l.values(b), -20, 20, 1));

  ExplicitGraph single(1, {});
  Window ws(single, Point{0}, 3);
  CHECK(separated_net(ws, 4, Point{0}) == PointSet{Point{0}});
}

TEST_CASE("separated nets on random graphs are separated nets") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = oracle::random_connected_graph(rng, 60, 4, 30);
    auto D = oracle::all_pairs(g);
    ExplicitGraph space(g.n, g.edges);
    Window w(space, Point{0}, 100);
    REQUIRE(w.complete());
    for (std::size_t K = 1; K <= 3; ++K) {
      int x0 = trial % g.n;
      PointSet a = separated_net(w, K, Point{static_cast<std::uint32_t>(x0)});
      CHECK(contains(a, Point{static_cast<std::uint32_t>(x0)}));
      for (Point p : a)
        for (Point q : a)
          if (p != q) CHECK(D[p.id][q.id] > static_cast<int>(K));
      for (int y = 0; y < g.n; ++y) {
        bool near = false;
        for (Point p : a) near = near || D[p.id][y] <= static_cast<int>(K);
        CHECK(near);
      }
    }
  }
}

TEST_CASE("verify_cqi examples") {
  Line l;
  Window w10 = l.window(10), w20 = l.window(20);
  auto id = l.map(w10.points(), [](std::int64_t x) { return x; });
  CHECK(verify_cqi(id, w10, w10, {0, 1}).ok());

  auto dbl = l.map(w10.points(), [](std::int64_t x) { return 2 * x; });
  CqiReport r = verify_cqi(dbl, w10, w20, {1, 2});
  CHECK(r.ok());
  CHECK(oracle_bilip(as_values(l, dbl), 2));
  CHECK(r.pairs_checked == 21 * 20 / 2);

  Window w30 = l.window(30);
  auto sq = l.map(l.select(w10, [](std::int64_t x) { return x >= 0 && x <= 5; }),
                  [](std::int64_t x) { return x * x; });
  CqiReport bad = verify_cqi(sq, w10, w30, {1, 2});
  CHECK_FALSE(bad.bilip_ok);
  CHECK_FALSE(oracle_bilip(as_values(l, sq), 2));
  bool witnessed = false;
  for (const Violation& v : bad.violations) {
    if (v.kind != "bilipschitz") continue;
    witnessed = true;
    std::int64_t a = v.points[0][0], b = v.points[1][0];
    CHECK(static_cast<std::int64_t>(v.d_source) == std::llabs(a - b));
    CHECK(static_cast<std::int64_t>(v.d_target) == std::llabs(a * a - b * b));
    CHECK(std::llabs(a * a - b * b) > 2 * std::llabs(a - b));
  }
  CHECK(witnessed);
  CHECK(bad.violations.size() <= 10);
}

TEST_CASE("net matching on shifted lattices") {
  Line l;
  Window w = l.window(40);
  PointSet a1 = l.select(w, [](std::int64_t x) { return ((x % 3) + 3) % 3 == 0; });
  PointSet a2 = l.select(w, [](std::int64_t x) { return ((x % 3) + 3) % 3 == 1; });
  MatchingResult m = net_matching(w, a1, a2, 3);
  CHECK(m.claimed.K == Rational(18));
  CHECK(m.claimed.C == Rational(5));
  CHECK(verify_cqi(m.h, w, w, m.claimed).ok());
  auto pairs = as_values(l, m.h);
  CHECK(oracle_bilip(pairs, 5));
  for (auto [x, y] : pairs) CHECK(std::llabs(x - y) <= 6);
  std::vector<std::int64_t> dom, im;
  for (auto [x, y] : pairs) {
    dom.push_back(x);
    im.push_back(y);
  }
  CHECK(oracle_net(dom, -25, 25, 15));
  CHECK(oracle_net(im, -31, 31, 9));

  MatchingResult same = net_matching(w, a1, a1, 3, std::make_pair(l.at(0), l.at(0)));
  for (auto [x, y] : same.h.pairs()) CHECK(x == y);
  CHECK(same.h(l.at(0)) == l.at(0));

  MatchingResult pinned = net_matching(w, a1, a2, 3, std::make_pair(l.at(0), l.at(-2)));
  CHECK(pinned.h(l.at(0)) == l.at(-2));
  CHECK(verify_cqi(pinned.h, w, w, pinned.claimed).ok());

  CHECK_THROWS_AS(net_matching(w, a1, a2, 3, std::make_pair(l.at(0), l.at(7))), Error);
  try {
    net_matching(w, a1, a2, 3, std::make_pair(l.at(0), l.at(7)));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::pin_too_far);
  }
  PointSet sparse = l.select(w, [](std::int64_t x) { return x % 10 == 0; });
  try {
    net_matching(w, sparse, a2, 3);
    FAIL("expected not-a-net");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_a_net);
  }
}

TEST_CASE("net matching on the plane") {
  auto z2 = make_lattice(2, {.horizon = 40});
  Window w(*z2, z2->root(), 12);
  std::vector<Point> even, odd;
  for (Point p : w.points()) {
    Key k = z2->key(p);
    bool e0 = k[0] % 2 == 0, e1 = k[1] % 2 == 0;
    if (e0 && e1) even.push_back(p);
    if (!e0 && !e1) odd.push_back(p);
  }
  MatchingResult m = net_matching(w, make_set(even), make_set(odd), 2);
  CHECK(verify_cqi(m.h, w, w, m.claimed).ok());
  for (auto [x, y] : m.h.pairs()) {
    Key a = z2->key(x), b = z2->key(y);
    CHECK(std::llabs(a[0] - b[0]) + std::llabs(a[1] - b[1]) <= 4);
  }
}

TEST_CASE("coarse composite of translations") {
  Line l;
  Window w = l.window(40);
  auto f = l.map(l.select(w, [](std::int64_t x) { return x % 2 == 0 && x <= 38; }),
                 [](std::int64_t x) { return x + 1; });
  auto f2 = l.map(l.select(w, [](std::int64_t x) { return x % 2 != 0 && x >= -37; }),
                  [](std::int64_t x) { return x - 3; });
  Distortion d{2, 1};
  REQUIRE(verify_cqi(f, w, w, d).ok());
  REQUIRE(verify_cqi(f2, w, w, d).ok());
  CompositeResult c = coarse_composite(f, f2, w, w, w, d);
  CHECK(c.claimed.K == Rational(12));
  CHECK(c.claimed.C == Rational(5));
  CHECK(verify_cqi(c.g, w, w, c.claimed).ok());
  CHECK(oracle_bilip(as_values(l, c.g), 5));
  for (auto [x, y] : c.g.pairs()) {
    std::int64_t fx = l.val(x) + 1;
    std::int64_t pre = l.val(*f2.inverse(y));
    CHECK(std::llabs(fx - pre) <= 4);
  }

  CompositeResult pinned = coarse_composite(f, f2, w, w, w, d, std::make_pair(l.at(0), l.at(3)));
  CHECK(pinned.g(l.at(0)) == l.at(0));

  auto id = l.map(l.select(w, [](std::int64_t x) { return x % 2 == 0; }), [](std::int64_t x) { return x; });
  CompositeResult ii = coarse_composite(id, id, w, w, w, {1, 1});
  CHECK(ii.claimed.K == Rational(6));
  CHECK(verify_cqi(ii.g, w, w, {6, 5}).ok());
  CHECK(verify_close(ii.g, id, w, w, 0, 2).ok);

  auto stretched = l.map(l.select(w, [](std::int64_t x) { return std::llabs(x) <= 10; }),
                         [](std::int64_t x) { return 3 * x; });
  try {
    coarse_composite(stretched, id, w, w, w, d);
    FAIL("expected distortion-mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::distortion_mismatch);
  }
}

TEST_CASE("constant substitutions") {
  Distortion kc{3, 2};
  Line l;
  Window w = l.window(10);
  auto id = l.map(w.points(), [](std::int64_t x) { return x; });
  CHECK(lsl_from_cqi(id, w, w, kc).claimed.lambda == Rational(2));
  CHECK(lsl_from_cqi(id, w, w, kc).claimed.b == Rational(12));
  CHECK(lsl_from_cqi(id, w, w, kc).claimed.c == Rational(3));

  Distortion d = distortion_from_lsl({2, 1, 1}, 2);
  CHECK(d.K == Rational(1 + 4 + 2 + 4 + 1));
  CHECK(d.C == Rational(5));
  CHECK(default_epsilon({2, 1, 1}) == Rational(4));
  Distortion unit = distortion_from_lsl({1, 0, 0}, 1);
  CHECK(unit.K == Rational(1));
  CHECK(unit.C == Rational(1));

  RoughProfile p;
  for (std::uint32_t r = 0; r <= 12; ++r) {
    p.s.push_back(r + 1);
    p.t.push_back(0);
  }
  auto bar = rough_bar(p, 2);
  REQUIRE(bar.size() == 9);
  for (std::uint32_t r = 0; r < bar.size(); ++r) CHECK(bar[r] == r + 5);
}

TEST_CASE("large-scale Lipschitz extensions") {
  Line l;
  Window w = l.window(30);
  PointSet evens = l.select(w, [](std::int64_t x) { return x % 2 == 0; });
  auto id = l.map(evens, [](std::int64_t x) { return x; });
  LslResult a = lsl_from_cqi(id, w, w, {1, 1});
  CHECK(a.claimed.lambda == Rational(1));
  CHECK(a.claimed.b == Rational(2));
  CHECK(a.claimed.c == Rational(1));
  CHECK(verify_lsl(a.phi, a.psi, w, w, a.claimed, 1).ok);
  for (Point p : evens) CHECK(a.phi.at(p) == p);
  CHECK(a.phi.at(l.at(3)) == l.at(2));  // tie goes to the smaller key

  auto shift = l.map(l.select(w, [](std::int64_t x) { return x % 2 == 0 && x <= 28; }),
                     [](std::int64_t x) { return x + 2; });
  REQUIRE(verify_cqi(shift, w, w, {2, 1}).ok());
  LslResult b = lsl_from_cqi(shift, w, w, {2, 1});
  CHECK(b.claimed.b == Rational(4));
  CHECK(b.claimed.c == Rational(2));
  CHECK(verify_lsl(b.phi, b.psi, w, w, b.claimed, 2).ok);

  LslReport tight = verify_lsl(b.phi, b.psi, w, w, {1, 0, 0}, 2);
  CHECK_FALSE(tight.ok);
  CHECK_FALSE(tight.violations.empty());
}

TEST_CASE("coarse quasi-isometry from an equivalence") {
  Line l;
  Window w = l.window(30);
  PointMap id = l.total(w, [](std::int64_t x) { return x; });
  CqiResult r = cqi_from_lsl(id, id, w, w, {1, 0, 0}, Rational(1), l.at(0));
  CHECK(r.claimed.K == Rational(1));
  CHECK(r.claimed.C == Rational(1));
  CHECK(r.separation == Rational(1));
  CHECK(r.f.defined(l.at(0)));
  CHECK(verify_cqi(r.f, w, w, r.claimed).ok());
  auto dom = l.values(r.f.domain());
  for (std::size_t i = 0; i + 1 < dom.size(); ++i) CHECK(dom[i + 1] - dom[i] > 1);

  PointMap collapse = l.total(w, [](std::int64_t) { return 0; });
  try {
    cqi_from_lsl(collapse, id, w, w, {1, 0, 0}, std::nullopt, l.at(0));
    FAIL("expected equivalence-check-failed");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::equivalence_check_failed);
  }
}

TEST_CASE("round trip through large-scale Lipschitz equivalences") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(20, 60)(rng);
    ExplicitGraph cyc = cycle_graph(n);
    Window w(cyc, Point{0}, n);
    std::size_t K = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    std::uint32_t start = std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
    PointSet a = separated_net(w, K, Point{start});
    std::int64_t shift = std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng);
    bool flip = trial % 2 == 1;
    std::vector<std::pair<Point, Point>> pairs;
    for (Point p : a) {
      std::int64_t v = flip ? -static_cast<std::int64_t>(p.id) : p.id;
      v = ((v + shift) % static_cast<std::int64_t>(n) + n) % n;
      pairs.emplace_back(p, Point{static_cast<std::uint32_t>(v)});
    }
    PartialBijection f(pairs);
    Distortion d{static_cast<std::int64_t>(K), 1};
    REQUIRE(verify_cqi(f, w, w, d).ok());
    LslResult lsl = lsl_from_cqi(f, w, w, d);
    CHECK(lsl.claimed.lambda == d.C);
    CHECK(lsl.claimed.b == 2 * d.C * d.K);
    CHECK(lsl.claimed.c == d.K);
    CHECK(verify_lsl(lsl.phi, lsl.psi, w, w, lsl.claimed, 0).ok);
    CqiResult back = cqi_from_lsl(lsl.phi, lsl.psi, w, w, lsl.claimed, std::nullopt, Point{start});
    Rational eps = 2 * lsl.claimed.c + lsl.claimed.b + 1;
    Rational lam = lsl.claimed.lambda, b = lsl.claimed.b, c = lsl.claimed.c;
    CHECK(back.claimed.K == c + 2 * lam * c + lam * b + lam * eps + b);
    CHECK(back.claimed.C == lam + (lam / eps) * (2 * c + b));
    CHECK(verify_cqi(back.f, w, w, back.claimed).ok());
  }
}

TEST_CASE("closeness is transitive at the certificate level") {
  std::mt19937_64 rng(5);
  ExplicitGraph cyc = cycle_graph(40);
  Window w(cyc, Point{0}, 40);
  auto rotation = [&](std::size_t K, std::uint32_t start, std::int64_t shift) {
    std::vector<std::pair<Point, Point>> pairs;
    for (Point p : separated_net(w, K, Point{start})) {
      pairs.emplace_back(p, Point{static_cast<std::uint32_t>((p.id + shift) % 40)});
    }
    return PartialBijection(pairs);
  };
  auto least_s = [&](const PartialBijection& a, const PartialBijection& b, std::int64_t r) {
    for (std::int64_t s = 0; s <= 40; ++s)
      if (verify_close(a, b, w, w, r, s).ok) return s;
    return std::int64_t{-1};
  };
  for (int trial = 0; trial < 30; ++trial) {
    auto pick = [&](int hi) { return std::uniform_int_distribution<int>(0, hi)(rng); };
    std::size_t kf = 1 + pick(2), kg = 1 + pick(2), kh = 1 + pick(2);
    auto f = rotation(kf, pick(39), pick(4));
    auto g = rotation(kg, pick(39), pick(4));
    auto h = rotation(kh, pick(39), pick(4));
    // dom g is a kg-net, so r >= kg always admits some s
    std::int64_t r = kg + pick(2), t = kh + pick(2);
    std::int64_t s = least_s(f, g, r), u = least_s(g, h, t);
    REQUIRE(s >= 0);
    REQUIRE(u >= 0);
    CHECK(verify_close(f, h, w, w, r + t, s + u).ok);
  }
}

TEST_CASE("rebasing a shift") {
  Line l;
  Window w = l.window(320);
  auto f = l.map(l.select(w, [](std::int64_t x) { return x % 2 == 0 && x < 320; }),
                 [](std::int64_t x) { return x + 1; });
  Distortion d{1, 1};
  REQUIRE(verify_cqi(f, w, w, d).ok());
  RebaseResult r = rebase_cqi(f, w, w, d, l.at(0), l.at(5), 5);
  CHECK(r.f(l.at(0)) == l.at(5));
  CHECK(l.val(r.anchor) == 0);
  CHECK(r.shifted.lambda == Rational(1));
  CHECK(r.shifted.b == Rational(14));
  CHECK(r.shifted.c == Rational(16));
  CHECK(r.claimed.K == Rational(123));
  CHECK(r.claimed.C == Rational(93, 47));
  CHECK(verify_cqi(r.f, w, w, r.claimed).ok());
  CHECK(verify_close(r.f, f, w, w, r.r, r.s).ok);

  try {
    rebase_cqi(f, w, w, d, l.at(0), l.at(30), 5);
    FAIL("expected no-anchor");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_anchor);
  }
}

TEST_CASE("rebasing the identity at its own basepoint") {
  Line l;
  Window w = l.window(200);
  auto id = l.map(w.points(), [](std::int64_t x) { return x; });
  RebaseResult r = rebase_cqi(id, w, w, {0, 1}, l.at(0), l.at(0), 0);
  CHECK(r.f(l.at(0)) == l.at(0));
  for (auto [x, y] : r.f.pairs()) CHECK(x == y);
  CHECK(verify_cqi(r.f, w, w, r.claimed).ok());
  CHECK(verify_close(r.f, id, w, w, r.r, r.s).ok);
}

TEST_CASE("Arzela-Ascoli limits") {
  Line l;
  Window w = l.window(30);
  auto interval = [&](std::int64_t n) { return l.select(w, [n](std::int64_t x) { return std::llabs(x) <= n; }); };
  std::vector<ChainStep> chain;
  for (std::int64_t n = 0; n < 10; ++n) {
    PointSet f = interval(n);
    bool reflect = n % 2 == 1;
    chain.push_back({f, f, l.map(f, [reflect](std::int64_t x) { return reflect ? -x : x; })});
  }
  AaResult a = aa_limit(chain, *l.z, *l.z, {0, 1}, 1, 5);
  CHECK(a.claimed.K == Rational(1));
  CHECK(a.depth == 5);
  for (auto [x, y] : a.g.pairs()) CHECK(x == y);
  CHECK(a.g.size() == 9);
  CHECK(a.g(l.at(0)) == l.at(0));
  CHECK(a.indices == std::vector<std::size_t>{0, 2, 2, 4, 4});
  AaResult full = aa_limit(chain, *l.z, *l.z, {0, 1}, 1);
  CHECK(full.g.size() == 19);
  CHECK(full.g(l.at(3)) == l.at(-3));

  std::vector<ChainStep> constant;
  auto refl = l.map(interval(9), [](std::int64_t x) { return -x; });
  for (std::int64_t n = 0; n < 6; ++n) constant.push_back({interval(n), interval(n), refl});
  AaResult c = aa_limit(constant, *l.z, *l.z, {0, 1}, 2);
  CHECK(c.claimed.K == Rational(2));
  CHECK(c.g.size() == 11);
  for (auto [x, y] : c.g.pairs()) CHECK(l.val(x) == -l.val(y));

  std::vector<ChainStep> broken;
  for (std::int64_t n = 0; n < 6; ++n) {
    broken.push_back({interval(n), interval(n), l.map(interval(n), [](std::int64_t x) { return x + 1; })});
  }
  try {
    aa_limit(broken, *l.z, *l.z, {1, 1}, 1);
    FAIL("expected no-infinite-ray");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_infinite_ray);
    CHECK(e.detail()["depth_reached"] == 0);
  }
}

TEST_CASE("rough profiles") {
  Line l;
  Window w = l.window(10);
  RoughProfile id = rough_profile(l.total(w, [](std::int64_t x) { return x; }), w, *l.z, 20);
  for (std::uint32_t r = 0; r <= 20; ++r) {
    CHECK(id.s[r] == r);
    CHECK(id.t[r] == r);
  }

  RoughProfile half = rough_profile(l.total(w, floor_div2), w, *l.z, 20);
  for (std::int64_t r = 0; r <= 20; ++r) {
    std::int64_t s = 0, t = 0;
    for (std::int64_t x = -10; x <= 10; ++x) {
      for (std::int64_t y = -10; y <= 10; ++y) {
        std::int64_t a = std::llabs(x - y), b = std::llabs(floor_div2(x) - floor_div2(y));
        if (a <= r) s = std::max(s, b);
        if (b <= r) t = std::max(t, a);
      }
    }
    CHECK(half.s[r] == s);
    CHECK(half.t[r] == t);
    CHECK(half.s[r] <= (r + 1) / 2 + 1);
  }

  RoughProfile flat = rough_profile(l.total(w, [](std::int64_t) { return 0; }), w, *l.z, 5);
  for (std::size_t r = 0; r <= 5; ++r) {
    CHECK(flat.s[r] == 0);
    CHECK(flat.t_unbounded[r]);
  }
  CHECK_FALSE(id.t_unbounded[3]);
}

TEST_CASE("rough equivalences") {
  Line l;
  Window w = l.window(10), w2 = l.window(20);
  PointMap id = l.total(w, [](std::int64_t x) { return x; });
  RoughEquivalence e = rough_equivalence(id, w, w, rough_profile(id, w, *l.z, 10), 0);
  CHECK(e.ok());
  CHECK(e.c == 0);
  for (const auto& [x, y] : e.g) CHECK(x == y);

  PointMap dbl = l.total(w, [](std::int64_t x) { return 2 * x; });
  RoughProfile p = rough_profile(dbl, w, *l.z, 10);
  RoughEquivalence d = rough_equivalence(dbl, w, w2, p, 1);
  CHECK(d.ok());
  CHECK(d.c == std::max<std::uint32_t>(1, p.combined(1)));
  for (const auto& [x, y] : d.g) CHECK(l.val(y) == floor_div2(l.val(x)));

  PointMap sparse = l.total(w, [](std::int64_t x) { return 5 * x; });
  Window w50 = l.window(50);
  try {
    rough_equivalence(sparse, w, w50, rough_profile(sparse, w, *l.z, 10), 1);
    FAIL("expected not-a-net");
  } catch (const Error& e2) {
    CHECK(e2.code() == Errc::not_a_net);
  }
}

TEST_CASE("partial bijection JSON round trip") {
  Line l;
  Window w = l.window(5);
  auto f = l.map(w.points(), [](std::int64_t x) { return -x; });
  nlohmann::json j = to_json(f, *l.z, *l.z);
  CHECK(j["pairs"][0] == nlohmann::json::array({-5, 5}));
  PartialBijection g = bijection_from_json(j, *l.z, *l.z);
  CHECK(g.pairs() == f.pairs());
  CHECK(to_json(Distortion{Rational(3, 2), 2})["K"] == "3/2");
  CHECK_THROWS_AS(PartialBijection({{l.at(0), l.at(1)}, {l.at(2), l.at(1)}}), Error);
}
