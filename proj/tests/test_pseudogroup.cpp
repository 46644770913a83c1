#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "coarse/cqi.hpp"
#include "coarse/error.hpp"
#include "coarse/pseudogroup.hpp"
#include "coarse/quadratic.hpp"
#include "coarse/serialize.hpp"
#include "doctest.h"

using namespace coarse;

namespace {

const double kPhi = (std::sqrt(5.0) - 1) / 2;

double frac(double v) { return v - std::floor(v); }

std::set<Key> as_set(const std::vector<Key>& v) { return {v.begin(), v.end()}; }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::invalid_argument;
}

// Structural checks every orbit ball must pass.
void check_ball(const PseudogroupPtr& pg, const OrbitBall& ball) {
  REQUIRE(!ball.points.empty());
  CHECK(ball.points[0] == ball.center);
  CHECK(as_set(ball.points).size() == ball.points.size());
  for (std::size_t i = 0; i < ball.points.size(); ++i) {
    CHECK(ball.words[i].size() == ball.depth[i]);
    auto z = pg->apply_word(ball.words[i], ball.center);
    REQUIRE(z);
    CHECK(*z == ball.points[i]);
  }
  for (const auto& [i, g, j] : ball.edges) {
    auto z = pg->apply(g, ball.points[i]);
    REQUIRE(z);
    CHECK(*z == ball.points[j]);
    auto back = pg->apply(pg->generators()[g].inverse, *z);
    REQUIRE(back);
    CHECK(*back == ball.points[i]);
  }
  ExplicitGraph g = ball_graph(ball);
  std::vector<Point> all;
  for (std::uint32_t i = 0; i < ball.points.size(); ++i) all.push_back(Point{i});
  auto row = pairwise_distances(g, {Point{0}}, all, ball.radius + 1);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(row[0][i] == ball.depth[i]);
}

// The ruler tree: column x of height ν₂(x) + 1 over the axis, column 0 infinite.
bool ruler_edge(std::int64_t x, std::int64_t y, int dir) {
  if (dir == 0) return y == 0;
  if (y < 0) return false;
  if (x == 0) return true;
  std::int64_t h = 1;
  while (x % 2 == 0) {
    x /= 2;
    ++h;
  }
  return y < h;
}

std::map<Key, int> ruler_bfs(Key from, int radius) {
  std::map<Key, int> d{{from, 0}};
  std::queue<Key> q;
  q.push(from);
  while (!q.empty()) {
    Key v = q.front();
    q.pop();
    if (d[v] == radius) continue;
    const std::int64_t x = v[0], y = v[1];
    std::vector<Key> next;
    if (ruler_edge(x, y, 0)) next.push_back({x + 1, y});
    if (ruler_edge(x - 1, y, 0)) next.push_back({x - 1, y});
    if (ruler_edge(x, y, 1)) next.push_back({x, y + 1});
    if (ruler_edge(x, y - 1, 1)) next.push_back({x, y - 1});
    for (const Key& w : next)
      if (!d.count(w)) {
        d[w] = d[v] + 1;
        q.push(w);
      }
  }
  return d;
}

int fib_symbol(long n) {
  const double beta = (3 - std::sqrt(5.0)) / 2;
  return static_cast<int>(std::floor((n + 1) * beta) - std::floor(n * beta));
}

}  // namespace

TEST_CASE("quadratic field arithmetic is exact") {
  QuadField F(5);
  Quad phi = F.make(-1, 1, 2);
  CHECK(F.floor(phi) == 0);
  CHECK(F.floor(F.scale(phi, 1000)) == 618);
  CHECK(F.floor(F.neg(phi)) == -1);
  CHECK(F.sign(F.sub(phi, F.from(Rational(618, 1000)))) == 1);
  CHECK(F.sign(F.sub(phi, F.from(Rational(619, 1000)))) == -1);
  Quad inv = F.inverse(phi);  // 1/φ = φ + 1
  CHECK(F.compare(inv, F.add(phi, F.from(Rational(1)))) == 0);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> u(-2000, 2000);
  for (int t = 0; t < 500; ++t) {
    std::int64_t a = u(rng), b = u(rng), c = std::max<std::int64_t>(1, std::abs(u(rng)));
    Quad x = F.make(a, b, c);
    double v = (a + b * std::sqrt(5.0)) / c;
    CHECK(F.floor(x) == static_cast<std::int64_t>(std::floor(v)));
    CHECK(F.dyadic_floor(x, 10) == static_cast<std::int64_t>(std::floor(v * 1024)));
    CHECK(F.frac(x).c > 0);
  }
  CHECK_THROWS(QuadField(4));
  CHECK(code_of([&] {
          Quad big = F.make(std::int64_t{1} << 62, 1, 1);
          (void)F.scale(big, 8);
        }) == Errc::budget_exhausted);
}

TEST_CASE("convergents of the golden mean are Fibonacci ratios") {
  QuadField F(5);
  auto cs = convergents(F, F.make(-1, 1, 2), 12);
  REQUIRE(cs.size() == 12);
  std::int64_t f0 = 0, f1 = 1;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    CHECK(cs[k] == Rational(f0, f1));
    std::int64_t f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
  }
  CHECK(cs[11] == Rational(89, 144));
  QuadField Q(0);
  auto rat = convergents(Q, Q.from(Rational(89, 144)), 40);
  CHECK(rat.back() == Rational(89, 144));
}

TEST_CASE("rational rotation orbit balls match modular arithmetic") {
  auto pg = parse_example("rotation(89/144)");
  for (std::size_t r : {0, 3, 10, 71, 72, 80}) {
    OrbitBall ball = orbit_ball(pg, pg->basepoints()[0], r);
    check_ball(pg, ball);
    std::set<Key> want;
    for (long i = -static_cast<long>(r); i <= static_cast<long>(r); ++i)
      want.insert(pg->parse_point(to_string(Rational(((89 * i) % 144 + 144) % 144, 144))));
    CHECK(as_set(ball.points) == want);
    CHECK(ball.points.size() == std::min<std::size_t>(2 * r + 1, 144));
    CHECK(ball.complete == (r >= 72));
  }
  CHECK(orbit_ball(pg, pg->basepoints()[0], 3).points.size() == 7);
}

TEST_CASE("lattice orbit balls are L1 balls") {
  auto z1 = parse_example("zd(1)");
  for (std::size_t r = 0; r <= 12; ++r) CHECK(orbit_ball(z1, Key{0}, r).points.size() == 2 * r + 1);
  auto z2 = parse_example("zd(2)");
  for (std::size_t r = 0; r <= 8; ++r) {
    OrbitBall ball = orbit_ball(z2, Key{3, -1}, r);
    check_ball(z2, ball);
    std::set<Key> want;
    const auto R = static_cast<std::int64_t>(r);
    for (std::int64_t a = -R; a <= R; ++a)
      for (std::int64_t b = -R; b <= R; ++b)
        if (std::abs(a) + std::abs(b) <= R) want.insert({3 + a, -1 + b});
    CHECK(as_set(ball.points) == want);
    CHECK(ball.points.size() == 2 * r * r + 2 * r + 1);
  }
}

TEST_CASE("ruler tree balls match a direct search of the tree") {
  auto pg = parse_example("tree(ruler)");
  OrbitBall b2 = orbit_ball(pg, Key{0, 0}, 2);
  std::set<Key> want2{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {2, 0}, {-2, 0}, {1, 1}, {-1, 1}, {0, 2}};
  CHECK(as_set(b2.points) == want2);
  for (Key c : {Key{0, 0}, Key{4, 0}, Key{-8, 2}, Key{0, 5}}) {
    OrbitBall ball = orbit_ball(pg, pg->parse_point(nlohmann::json(c)), 6);
    check_ball(pg, ball);
    auto d = ruler_bfs(c, 6);
    std::set<Key> want;
    for (const auto& [k, dist] : d) want.insert(k);
    CHECK(as_set(ball.points) == want);
    for (std::size_t i = 0; i < ball.points.size(); ++i) CHECK(ball.depth[i] == static_cast<std::size_t>(d[ball.points[i]]));
  }
  // In a tree, geodesics between ball points stay in the ball, so the ball metric is the tree metric.
  OrbitBall ball = orbit_ball(pg, Key{0, 0}, 4);
  ExplicitGraph g = ball_graph(ball);
  std::vector<Point> all;
  for (std::uint32_t i = 0; i < ball.points.size(); ++i) all.push_back(Point{i});
  auto D = pairwise_distances(g, all, all, 16);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto from = ruler_bfs(ball.points[i], 16);
    for (std::size_t j = 0; j < all.size(); ++j) {
      CHECK(D[i][j] == static_cast<std::uint32_t>(from.at(ball.points[j])));
      CHECK(D[i][j] == D[j][i]);
    }
  }
  CHECK(code_of([&] { pg->parse_point(nlohmann::json::array({1, 2})); }) == Errc::invalid_argument);
  CHECK(code_of([&] { make_example("tree", {{"code", "spiral"}}); }) == Errc::unsupported_name);
}

TEST_CASE("finite trees validate and give finite orbits") {
  nlohmann::json edges = {{0, 0, 1, 0}, {1, 0, 1, 1}, {1, 1, 2, 1}};
  auto pg = make_example("tree", {{"code", {{"edges", edges}}}});
  OrbitBall ball = orbit_ball(pg, Key{0, 0}, 10);
  CHECK(ball.complete);
  CHECK(ball.points.size() == 4);
  nlohmann::json cyc = {{0, 0, 1, 0}, {1, 0, 1, 1}, {1, 1, 0, 1}, {0, 1, 0, 0}};
  CHECK(code_of([&] { make_example("tree", {{"code", {{"edges", cyc}}}}); }) == Errc::invalid_argument);
  nlohmann::json far = {{0, 0, 1, 0}, {5, 5, 5, 6}};
  CHECK(code_of([&] { make_example("tree", {{"code", {{"edges", far}}}}); }) == Errc::invalid_argument);
}

TEST_CASE("Fibonacci shift follows the Sturmian word") {
  auto pg = parse_example("shift(fibonacci)");
  const auto r0 = pg->generator_index("right[0]"), r1 = pg->generator_index("right[1]");
  for (long n = -300; n <= 300; ++n) {
    Key x{n};
    CHECK(pg->apply(r0, x).has_value() == (fib_symbol(n) == 0));
    CHECK(pg->apply(r1, x).has_value() == (fib_symbol(n) == 1));
  }
  OrbitBall ball = orbit_ball(pg, Key{0}, 20);
  check_ball(pg, ball);
  CHECK(ball.points.size() == 41);
  auto periodic = parse_example("shift(0110)");
  CHECK(orbit_ball(periodic, Key{0}, 50).points.size() == 4);
  CHECK(periodic->parse_point(9) == Key{1});
}

TEST_CASE("custom prefix rewriting keeps canonical points") {
  nlohmann::json params = {{"alphabet", "01"},
                           {"rules", {{{"name", "a"}, {"from", "0"}, {"to", "1"}, {"inverse", "A"}},
                                      {{"name", "t"}, {"from", "01"}, {"to", "10"}}}}};
  auto pg = make_example("custom", params);
  CHECK(pg->parse_point("0(0)") == pg->parse_point("(0)"));
  CHECK(pg->parse_point("1(01)") == pg->parse_point("(10)"));
  CHECK(pg->parse_point("(0101)") == pg->parse_point("(01)"));
  const auto a = pg->generator_index("a"), A = pg->generator_index("A"), t = pg->generator_index("t");
  CHECK(*pg->apply(a, pg->parse_point("(0)")) == pg->parse_point("1(0)"));
  CHECK(!pg->apply(A, pg->parse_point("(0)")));
  CHECK(*pg->apply(t, pg->parse_point("(01)")) == pg->parse_point("10(01)"));
  CHECK(*pg->apply(a, pg->parse_point("(01)")) == pg->parse_point("1(10)"));
  CHECK(pg->point_json(pg->parse_point("001(1)")) == "00(1)");
  OrbitBall ball = orbit_ball(pg, pg->parse_point("(01)"), 6);
  check_ball(pg, ball);
  CHECK(code_of([&] { pg->parse_point("2(0)"); }) == Errc::invalid_argument);
}

TEST_CASE("predicates and example parsing") {
  auto rot = parse_example("rotation(89/144)");
  auto arc = rot->parse_predicate({{"arc", {"0", "1/10"}}});
  CHECK(arc(rot->parse_point("0")));
  CHECK(!arc(rot->parse_point("1/10")));
  auto open = rot->parse_predicate({{"open_arc", {"0", "1/10"}}});
  CHECK(!open(rot->parse_point("0")));
  auto z = parse_example("zd(2)");
  auto even = z->parse_predicate({{"mod", 2}, {"residues", {0, 0}}});
  CHECK(even(Key{2, -4}));
  CHECK(!even(Key{1, 0}));
  auto either = z->parse_predicate({{"any", {{{"points", {{1, 0}}}}, {{"box", 0}}}}});
  CHECK(either(Key{1, 0}));
  CHECK(either(Key{0, 0}));
  CHECK(!either(Key{0, 1}));
  auto neither = z->parse_predicate({{"not", {{"box", 1}}}});
  CHECK(neither(Key{2, 0}));
  CHECK(code_of([&] { z->parse_predicate({{"arc", {0, 1}}}); }) == Errc::parse_error);
  auto tree = parse_example("tree(ruler)");
  CHECK(tree->parse_predicate({{"degree", 3}})(Key{0, 0}));
  CHECK(code_of([&] { make_example("torus", {}); }) == Errc::unsupported_name);
  CHECK(code_of([&] { parse_example("zd(x)"); }) == Errc::parse_error);
  auto round = pseudogroup_from_json(to_json(*rot));
  CHECK(round->describe() == rot->describe());
  nlohmann::json desc = {{"kind", "zd"}, {"params", {{"d", 1}}}, {"basepoints", {{0}, {5}}}};
  CHECK(pseudogroup_from_json(desc)->basepoints().size() == 2);
  auto conv = make_example("rotation", {{"alpha", "golden"}, {"convergent", 11}});
  CHECK(conv->point_json(conv->apply(0, Key{0, 0, 1}).value()) == "89/144");
}

TEST_CASE("recurrence radius matches a cyclic search for a rational rotation") {
  auto pg = parse_example("rotation(89/144)");
  auto arc = pg->parse_predicate({{"arc", {"0", "1/10"}}});
  // Orbit index k sits at 89k mod 144; distance in the orbit graph is cyclic in k.
  std::vector<int> hit;
  for (int k = 0; k < 144; ++k)
    if ((89 * k) % 144 * 10 < 144) hit.push_back(k);
  int want = 0;
  for (int k = 0; k < 144; ++k) {
    int best = 1000;
    for (int h : hit) best = std::min({best, std::abs(k - h), 144 - std::abs(k - h)});
    want = std::max(want, best);
  }
  RecurrenceReport rep = recurrence_radius(pg, arc, pg->basepoints(), 40);
  REQUIRE(rep.R);
  CHECK(*rep.R == static_cast<std::size_t>(want));
  RecurrenceReport tight = recurrence_radius(pg, arc, pg->basepoints(), static_cast<std::size_t>(want) - 1, 72);
  CHECK(!tight.R);
  CHECK(tight.witness);
}

TEST_CASE("recurrence radius for a golden rotation matches a floating-point scan") {
  auto pg = parse_example("rotation(golden)");
  for (const char* hi : {"1/10", "1/7", "1/3"}) {
    auto arc = pg->parse_predicate({{"arc", {"0", hi}}});
    const double h = rational_from_json(hi).numerator() / static_cast<double>(rational_from_json(hi).denominator());
    std::vector<long> hits;
    for (long k = -200; k <= 200; ++k)
      if (frac(k * kPhi) < h) hits.push_back(k);
    long want = 0;
    for (long k = -60; k <= 60; ++k) {
      long best = 1000;
      for (long t : hits) best = std::min(best, std::abs(k - t));
      want = std::max(want, best);
    }
    RecurrenceReport rep = recurrence_radius(pg, arc, pg->basepoints(), 30, 60);
    REQUIRE(rep.R);
    CHECK(*rep.R == static_cast<std::size_t>(want));
    CHECK(rep.points_checked == 121);
  }
}

TEST_CASE("recurrence radius on the integers") {
  auto pg = parse_example("zd(1)");
  auto evens = pg->parse_predicate({{"mod", 2}, {"residues", {0}}});
  for (std::size_t h : {1, 4, 9}) {
    auto rep = recurrence_radius(pg, evens, pg->basepoints(), h);
    REQUIRE(rep.R);
    CHECK(*rep.R == 1);
  }
  auto origin = pg->parse_predicate({{"points", {{0}}}});
  for (std::size_t h : {1, 5, 20}) {
    auto rep = recurrence_radius(pg, origin, pg->basepoints(), h);
    CHECK(!rep.R);
    REQUIRE(rep.witness);
    CHECK(std::abs((*rep.witness)[0]) > static_cast<std::int64_t>(h));
  }
}

TEST_CASE("Reeb neighborhoods of the Fibonacci shift are cylinders") {
  auto pg = parse_example("shift(fibonacci)");
  for (std::size_t r : {1, 2, 3}) {
    ReebNeighborhood V(pg, Key{0}, r);
    auto desc = V.descriptor()["neighborhood"];
    CHECK(desc["type"] == "cylinder");
    CHECK(desc["lo"] == -2 * static_cast<long>(r));
    CHECK(desc["hi"] == 2 * static_cast<long>(r) - 1);
    const long lo = desc["lo"], hi = desc["hi"];
    std::vector<long> inside;
    for (long n = 1; n < 3000; ++n) {
      bool match = true;
      for (long i = lo; i <= hi; ++i) match = match && fib_symbol(n + i) == fib_symbol(i);
      CHECK(V.contains(Key{n}) == match);
      if (match) inside.push_back(n);
    }
    REQUIRE(inside.size() >= 2);
    for (long n : inside) {
      ReebMap m = V.map_to(Key{n});
      CHECK(m.edges_preserved);
      CHECK(m.isometric);
      CHECK(m.non_expanding);
      CHECK(m.pairs.size() == 2 * r + 1);
      for (const auto& [a, b] : m.pairs) CHECK(b[0] - a[0] == n);
    }
    // φ_{x,z} = φ_{y,z} ∘ φ_{x,y}.
    Key y{inside[0]}, z{inside[1]};
    ReebNeighborhood Vy(pg, y, r);
    REQUIRE(Vy.contains(z));
    ReebMap xy = V.map_to(y), yz = Vy.map_to(z), xz = V.map_to(z);
    std::map<Key, Key> f(yz.pairs.begin(), yz.pairs.end());
    for (std::size_t i = 0; i < xy.pairs.size(); ++i) CHECK(f.at(xy.pairs[i].second) == xz.pairs[i].second);
    CHECK(code_of([&] {
            for (long n = 1;; ++n)
              if (!V.contains(Key{n})) {
                V.map_to(Key{n});
                break;
              }
          }) == Errc::invalid_argument);
  }
}

TEST_CASE("Reeb neighborhoods for translations and rotations are everything") {
  auto z = parse_example("zd(2)");
  ReebNeighborhood V(z, Key{0, 0}, 3);
  CHECK(V.descriptor()["neighborhood"]["type"] == "everything");
  ReebMap m = V.map_to(Key{17, -4});
  CHECK(m.isometric);
  CHECK(m.pairs.size() == 25);
  auto rot = parse_example("rotation(golden)");
  ReebNeighborhood W(rot, rot->basepoints()[0], 4);
  CHECK(W.descriptor()["neighborhood"]["whole_circle"] == true);
  CHECK(W.map_to(rot->parse_point("1/3")).isometric);
  auto rat = parse_example("rotation(89/144)");
  ReebNeighborhood U(rat, rat->basepoints()[0], 40);
  CHECK(U.map_to(rat->parse_point("1/2")).isometric);
}

TEST_CASE("holonomy obstructions carry a closed witness word") {
  auto check = [](const PseudogroupPtr& pg, const Key& x, std::size_t r) {
    try {
      ReebNeighborhood V(pg, x, r);
      FAIL("expected a holonomy obstruction");
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::holonomy_obstruction);
      std::vector<std::size_t> word;
      for (const auto& name : e.detail().at("word")) word.push_back(pg->generator_index(name));
      CHECK(!word.empty());
      CHECK(word.size() <= 4 * r);
      auto back = pg->apply_word(word, x);
      REQUIRE(back);
      CHECK(*back == x);
    }
  };
  check(parse_example("shift(01)"), Key{0}, 1);
  check(parse_example("shift(0010)"), Key{1}, 1);
  check(parse_example("tree(comb)"), Key{0, 0}, 1);
  check(parse_example("tree(line)"), Key{0, 0}, 2);
  nlohmann::json params = {{"alphabet", "01"}, {"rules", {{{"name", "s"}, {"from", "0"}, {"to", "00"}}}}};
  auto custom = make_example("custom", params);
  check(custom, custom->parse_point("(0)"), 1);
  // The ruler tree has no translation symmetry; small balls do not see a loop.
  auto ruler = parse_example("tree(ruler)");
  ReebNeighborhood V(ruler, Key{0, 0}, 2);
  CHECK(V.descriptor()["neighborhood"]["type"] == "box");
  CHECK(V.map_to(Key{0, 0}).isometric);
}

TEST_CASE("grid depth") {
  CHECK(grid_depth(Rational(1)) == 0);
  CHECK(grid_depth(Rational(1, 2)) == 1);
  CHECK(grid_depth(Rational(1, 3)) == 2);
  CHECK(grid_depth(Rational(1, 8)) == 3);
  CHECK(grid_depth(Rational(1, std::int64_t{1} << 40)) == 40);
  CHECK(code_of([] { grid_depth(Rational(1, (std::int64_t{1} << 40) + 1)); }) == Errc::resolution_unreachable);
  CHECK(code_of([] { grid_depth(Rational(0)); }) == Errc::invalid_argument);
  CHECK(code_of([] { grid_depth(Rational(3, 2)); }) == Errc::invalid_argument);
}

TEST_CASE("limit set samples") {
  auto rot = parse_example("rotation(golden)");
  Key far = *rot->apply_word(std::vector<std::size_t>(1000, 0), rot->basepoints()[0]);
  LimitSample s = limit_set_sample(rot, {{rot->basepoints()[0], 60}, {far, 60}}, Rational(1, 16));
  CHECK(s.depth == 4);
  CHECK(s.cells.size() == 16);
  std::set<long> want;
  for (long k = 940; k <= 1060; ++k) want.insert(static_cast<long>(std::floor(frac(k * kPhi) * 16)));
  CHECK(want.size() == 16);

  auto z = parse_example("zd(1)");
  LimitSample esc = limit_set_sample(z, {{Key{0}, 3}, {Key{100}, 3}}, Rational(1, 4));
  CHECK(esc.cells.empty());
  CHECK(esc.cells_per_window == std::vector<std::size_t>{7, 0});

  auto shift = make_example("shift", {{"word", {{"left", "0"}, {"middle", "2"}, {"right", "1"}}}});
  LimitSample tail = limit_set_sample(shift, {{Key{0}, 40}, {Key{100}, 5}}, Rational(1, 2));
  REQUIRE(tail.cells.size() == 1);
  CHECK(shift->cell_json(tail.cells[0], 1) == "11");
  CHECK(tail.cells_per_window[0] == 4);  // 00, 02, 21, 11
}

TEST_CASE("doubling of a rational rotation") {
  auto pg = parse_example("rotation(89/144)");
  GroupDouble d = group_double(pg, 15);
  CHECK(d.report.involutions_ok);
  CHECK(d.report.bounds_ok);
  CHECK(d.report.min_gap == 0);
  CHECK(d.report.max_gap == 1);
  CHECK(d.report.generators == std::vector<std::string>{"g[+a]", "g[-a]", "g[id]"});
  OrbitBall all = orbit_ball(d.doubled, d.doubled->basepoints()[0], 400);
  CHECK(all.complete);
  CHECK(all.points.size() == 288);
  auto small = parse_example("rotation(2/7)");
  CHECK(orbit_ball(double_of(small), double_of(small)->basepoints()[0], 100).points.size() == 14);
}

TEST_CASE("doubling of the integers matches the ladder") {
  auto z = parse_example("zd(1)");
  auto F = double_of(z);
  // Brute force on Z × {0,1}: g[+e1] and g[−e1] flip the layer while stepping, g[id] only flips.
  std::map<std::pair<long, int>, int> dist{{{0, 0}, 0}};
  std::queue<std::pair<long, int>> q;
  q.push({0, 0});
  while (!q.empty()) {
    auto [x, l] = q.front();
    q.pop();
    if (dist[{x, l}] >= 30) continue;
    std::vector<std::pair<long, int>> next{{l == 0 ? x + 1 : x - 1, 1 - l}, {l == 0 ? x - 1 : x + 1, 1 - l}, {x, 1 - l}};
    for (auto w : next)
      if (!dist.count(w)) {
        dist[w] = dist[{x, l}] + 1;
        q.push(w);
      }
  }
  OrbitBall ball = orbit_ball(F, Key{0, 0}, 20);
  check_ball(F, ball);
  for (std::size_t i = 0; i < ball.points.size(); ++i) {
    std::pair<long, int> p{ball.points[i][0], static_cast<int>(ball.points[i][1])};
    CHECK(ball.depth[i] == static_cast<std::size_t>(dist.at(p)));
  }
  for (long k = -10; k <= 10; ++k) {
    long want = std::abs(k) % 2 == 0 ? std::abs(k) : std::abs(k) + 1;
    CHECK(dist.at({k, 0}) == want);
  }
  GroupDouble d = group_double(z, 15);
  CHECK(d.report.bounds_ok);
  CHECK(d.report.involutions_ok);
  CHECK(d.report.max_gap == 1);
  CHECK(d.report.pairs_checked == 31 * 30 / 2);
}

TEST_CASE("rotation demo keeps small balls inside the thin set") {
  auto pg = parse_example("rotation(golden)");
  RotationDemo demo = rotation_demo(pg, 6);
  CHECK(demo.measure_bound <= Rational(1, 4));
  REQUIRE(demo.rows.size() == 6);
  for (const auto& row : demo.rows) {
    CHECK(row.ball_is_orbit_segment);
    CHECK(row.ball_in_A);
    CHECK(row.ball_size == 2 * row.n + 1);
    const double lo = boost::rational_cast<double>(row.arc_lo), hi = boost::rational_cast<double>(row.arc_hi);
    const double x = frac(row.steps * kPhi);
    CHECK(x > lo);
    CHECK(x < hi);
  }
  CHECK(code_of([] { rotation_demo(parse_example("zd(1)"), 3); }) == Errc::invalid_argument);
}

TEST_CASE("balls in a rational rotation orbit are intervals") {
  auto pg = parse_example("rotation(89/144)");
  for (std::size_t r : {5, 36, 50, 71}) {
    OrbitBall ball = orbit_ball(pg, pg->basepoints()[0], r);
    ExplicitGraph src = ball_graph(ball);
    ExplicitGraph dst = path_graph(2 * r + 1);
    std::vector<std::pair<Point, Point>> pairs;
    for (std::size_t i = 0; i < ball.points.size(); ++i) {
      long pos = static_cast<long>(r);
      for (std::size_t g : ball.words[i]) pos += g == 0 ? 1 : -1;
      pairs.emplace_back(Point{static_cast<std::uint32_t>(i)}, Point{static_cast<std::uint32_t>(pos)});
    }
    PartialBijection f(pairs);
    Window a(src, Point{0}, r), b(dst, Point{static_cast<std::uint32_t>(r)}, r);
    CHECK(verify_cqi(f, a, b, Distortion{Rational(1), Rational(1)}).ok());
  }
}
