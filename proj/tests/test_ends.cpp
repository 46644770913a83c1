#include <algorithm>
#include <numeric>
#include <random>
#include <map>
#include <set>

#include "coarse/ends.hpp"
#include "coarse/error.hpp"
#include "coarse/spaces.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace coarse;

namespace {

std::set<std::set<std::uint32_t>> partition_of(const std::vector<Component>& comps) {
  std::set<std::set<std::uint32_t>> out;
  for (const Component& c : comps) {
    std::set<std::uint32_t> s;
    for (Point p : c.points) s.insert(p.id);
    out.insert(s);
  }
  return out;
}

// Classes of V ∖ removed under d <= mu, by union-find over all pairs.
std::set<std::set<std::uint32_t>> oracle_partition(const std::vector<std::vector<int>>& D,
                                                   const oracle::Set& removed, int mu) {
  int n = static_cast<int>(D.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto out_of = [&](int v) { return !std::binary_search(removed.begin(), removed.end(), v); };
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (out_of(u) && out_of(v) && D[u][v] >= 0 && D[u][v] <= mu) parent[find(u)] = find(v);
  std::map<int, std::set<std::uint32_t>> classes;
  for (int v = 0; v < n; ++v)
    if (out_of(v)) classes[find(v)].insert(static_cast<std::uint32_t>(v));
  std::set<std::set<std::uint32_t>> result;
  for (auto& [root, s] : classes) result.insert(s);
  return result;
}

std::vector<std::size_t> counts(const ComponentForest& f) {
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n <= f.depth(); ++n) out.push_back(f.escaping_count(n));
  return out;
}

void check_forest_invariants(const Window& w, const ComponentForest& f) {
  const Space& space = w.space();
  auto K = space.degree_bound();
  for (std::size_t n = 1; n <= f.depth(); ++n) {
    PointSet removed = open_ball(space, w.center(), f.removed_radius(n));
    DistanceMap near = distances_from(space, removed, 3 * f.mu);
    for (const Component& c : f.levels[n - 1]) {
      if (n > 1) {
        REQUIRE(c.parent);
        CHECK(is_subset(c.points, f.levels[n - 2][*c.parent].points));
      }
      if (c.escaping) {
        CHECK(std::any_of(c.points.begin(), c.points.end(), [&](Point p) { return near.count(p) != 0; }));
      }
    }
    std::size_t diam = f.removed_radius(n) >= 1 ? 2 * (f.removed_radius(n) - 1) : 0;
    if (K) CHECK(f.escaping_count(n) <= lambda_bound(*K, diam + 3 * f.mu));
  }
}

}  // namespace

TEST_CASE("coarse connected components examples") {
  auto z = make_lattice(1, {.horizon = 60});
  Window w(*z, z->root(), 20);
  auto c1 = mu_components(w, PointSet{z->root()}, 1);
  REQUIRE(c1.size() == 2);
  CHECK(c1[0].escaping);
  CHECK(c1[1].escaping);
  CHECK(z->key(c1[0].points.front())[0] < 0);
  auto c2 = mu_components(w, PointSet{z->root()}, 2);
  REQUIRE(c2.size() == 1);
  CHECK(c2[0].escaping);

  auto z2 = make_lattice(2, {.horizon = 60});
  Window w2(*z2, z2->root(), 20);
  auto c3 = mu_components(w2, ball(*z2, z2->root(), 3), 1);
  REQUIRE(c3.size() == 1);
  CHECK(c3[0].escaping);

  try {
    mu_components(w, PointSet{z->at(Key{19})}, 2);
    FAIL("expected margin-too-small");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::margin_too_small);
  }
}

TEST_CASE("coarse components agree with a union-find oracle") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    auto g = oracle::random_connected_graph(rng, 50, 3, 5);
    auto D = oracle::all_pairs(g);
    ExplicitGraph space(g.n, g.edges);
    Window all(space, Point{0}, 200);
    REQUIRE(all.complete());
    oracle::Set removed = oracle::random_subset(rng, g.n, 12);
    std::vector<Point> pts;
    for (int v : removed) pts.push_back(Point{static_cast<std::uint32_t>(v)});
    for (int mu = 1; mu <= 3; ++mu) {
      auto comps = mu_components(all, make_set(pts), mu);
      CHECK(partition_of(comps) == oracle_partition(D, removed, mu));
      for (const Component& c : comps) CHECK_FALSE(c.escaping);
    }
  }
}

TEST_CASE("end forests of the line, the plane and the tree") {
  auto z = make_lattice(1, {.horizon = 100});
  Window w(*z, z->root(), 40);
  ComponentForest fz = end_tree(w, 1, 10);
  CHECK(counts(fz) == std::vector<std::size_t>(10, 2));
  for (std::size_t n = 2; n <= 10; ++n) {
    std::vector<std::size_t> parents;
    for (const Component& c : fz.levels[n - 1]) parents.push_back(*c.parent);
    CHECK(parents == std::vector<std::size_t>{0, 1});
  }
  check_forest_invariants(w, fz);
  for (std::size_t depth = 4; depth <= 12; ++depth) {
    EndClass e = end_classification(end_tree(w, 1, depth));
    CHECK(e.kind == EndKind::two);
    CHECK(to_string(e) == "2");
  }

  auto z2 = make_lattice(2, {.horizon = 40});
  Window w2(*z2, z2->root(), 20);
  ComponentForest fp = end_tree(w2, 1, 8);
  CHECK(counts(fp) == std::vector<std::size_t>(8, 1));
  CHECK(end_classification(fp).kind == EndKind::one);
  check_forest_invariants(w2, end_tree(w2, 2, 6));

  auto tree = make_regular_tree(3, {.horizon = 20});
  Window wt(*tree, tree->root(), 15);
  ComponentForest ft = end_tree(wt, 1, 12);
  for (std::size_t n = 1; n <= 12; ++n) CHECK(ft.escaping_count(n) == 3u << (n - 1));
  CHECK(end_classification(ft).kind == EndKind::cantor_like);
  check_forest_invariants(wt, ft);

  ExplicitGraph cyc = cycle_graph(30);
  Window wc(cyc, Point{0}, 100);
  ComponentForest fc = end_tree(wc, 1, 8);
  CHECK(counts(fc) == std::vector<std::size_t>(8, 0));
  CHECK(end_classification(fc).kind == EndKind::zero);
  CHECK(end_classification(end_tree(wc, 1, 3)).kind == EndKind::inconclusive);

  CHECK_THROWS_AS(end_tree(w, 2, 36), Error);
}

TEST_CASE("three rays give finitely many ends") {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const std::size_t len = 60;
  for (std::size_t arm = 0; arm < 3; ++arm) {
    std::size_t prev = 0;
    for (std::size_t i = 1; i <= len; ++i) {
      std::size_t v = arm * len + i;
      edges.emplace_back(prev, v);
      prev = v;
    }
  }
  ExplicitGraph star(3 * len + 1, edges);
  Window w(star, Point{0}, 30);
  EndClass e = end_classification(end_tree(w, 1, 10));
  CHECK(e.kind == EndKind::finite);
  CHECK(e.count == 3);
  CHECK(to_string(e) == "finite(3)");
}

TEST_CASE("theta and xi maps between forests") {
  auto z = make_lattice(1, {.horizon = 100});
  Window w(*z, z->root(), 40);
  ComponentForest one = end_tree(w, 1, 8), two = end_tree(w, 2, 8);
  LevelMap id = theta_map(one, one);
  for (std::size_t n = 1; n <= 8; ++n)
    for (std::size_t i = 0; i < id[n - 1].size(); ++i) CHECK(id[n - 1][i] == i);
  LevelMap t = theta_map(one, two);
  CHECK(t[0] == std::vector<std::optional<std::size_t>>{0, 0});
  CHECK(t[1] == std::vector<std::optional<std::size_t>>{0, 1});
  CHECK_FALSE(bijective_on_escaping(t, one, two));
  CHECK_THROWS_AS(theta_map(two, one), Error);

  auto check_offset = [](const Window& win, std::size_t depth) {
    ComponentForest f1 = end_tree(win, 1, depth);
    ComponentForest f3 = end_tree(win, 3, depth);
    ComponentForest f3p = end_tree(win, 3, depth, 1);
    LevelMap xi = xi_map(f3p, f1);
    CHECK(bijective_on_escaping(xi, f3p, f1));
    LevelMap theta = theta_map(f1, f3);
    LevelMap eta = containment_map(f3p, f3);
    for (std::size_t n = 1; n <= depth; ++n) {
      for (std::size_t i = 0; i < f3p.levels[n - 1].size(); ++i) {
        REQUIRE(xi[n - 1][i]);
        CHECK(theta[n - 1][*xi[n - 1][i]] == eta[n - 1][i]);
      }
    }
    CHECK_THROWS_AS(xi_map(f3, f1), Error);
  };
  check_offset(w, 8);
  auto z2 = make_lattice(2, {.horizon = 40});
  check_offset(Window(*z2, z2->root(), 20), 6);
  auto tree = make_regular_tree(3, {.horizon = 20});
  Window wt(*tree, tree->root(), 14);
  check_offset(wt, 4);
  ComponentForest t1 = end_tree(wt, 1, 4);
  LevelMap same = theta_map(t1, t1);
  CHECK(bijective_on_escaping(same, t1, t1));
}

TEST_CASE("forest export") {
  auto z = make_lattice(1, {.horizon = 60});
  Window w(*z, z->root(), 20);
  ComponentForest f = end_tree(w, 1, 4);
  nlohmann::json j = to_json(*z, f);
  CHECK(j["escaping_counts"] == nlohmann::json::array({2, 2, 2, 2}));
  CHECK(j["classification"] == "2");
  CHECK(j["levels"][1][0]["parent"] == 0);
  CHECK(j["levels"][0][0]["parent"].is_null());
  std::string dot = to_dot(f);
  CHECK(dot.find("c1_1 -> c2_1") != std::string::npos);
}
