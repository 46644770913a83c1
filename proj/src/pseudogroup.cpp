#include "coarse/pseudogroup.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "coarse/error.hpp"
#include "coarse/serialize.hpp"
#include "pseudogroup_kinds.hpp"

namespace coarse {

// ---------------------------------------------------------------- base class

std::size_t Pseudogroup::generator_index(const std::string& name) const {
  for (std::size_t i = 0; i < gens_.size(); ++i)
    if (gens_[i].name == name) return i;
  throw Error(Errc::invalid_argument, "no generator named '" + name + "'");
}

void Pseudogroup::set_basepoints(std::vector<Key> points) {
  if (points.empty()) throw Error(Errc::invalid_argument, "at least one basepoint is required");
  basepoints_ = std::move(points);
}

std::optional<Key> Pseudogroup::apply_word(const std::vector<std::size_t>& word, const Key& x) const {
  std::optional<Key> cur = x;
  for (std::size_t g : word) {
    cur = apply(g, *cur);
    if (!cur) return std::nullopt;
  }
  return cur;
}

void Pseudogroup::add_pair(const std::string& name, const std::string& inverse_name) {
  const std::size_t i = gens_.size();
  gens_.push_back({name, i + 1});
  gens_.push_back({inverse_name, i});
}

void Pseudogroup::add_involution(const std::string& name) { gens_.push_back({name, gens_.size()}); }

Key Pseudogroup::transport_origin() const {
  throw Error(Errc::invalid_argument, kind() + " points carry no walk transport");
}

std::optional<TransportStep> Pseudogroup::transport(const Key&, std::size_t, const Key&) const {
  throw Error(Errc::invalid_argument, kind() + " points carry no walk transport");
}

bool Pseudogroup::same_action(const Key&, const Key& s1, const Key& s2) const { return s1 == s2; }

bool Pseudogroup::agrees(const Key&, const Key&, const std::vector<Key>& reads) const {
  return reads.empty();
}

nlohmann::json Pseudogroup::neighborhood_json(const Key&, const std::vector<Key>&) const {
  return {{"type", "everything"}};
}

nlohmann::json Pseudogroup::cell_json(const Key& cell, std::size_t) const { return key_to_json(cell); }

std::optional<std::function<bool(const Key&)>> Pseudogroup::kind_predicate(const nlohmann::json&) const {
  return std::nullopt;
}

std::function<bool(const Key&)> Pseudogroup::parse_predicate(const nlohmann::json& j) const {
  if (!j.is_object()) throw Error(Errc::parse_error, "predicate must be a JSON object");
  if (j.contains("points")) {
    std::set<Key> pts;
    for (const auto& p : j.at("points")) pts.insert(parse_point(p));
    return [pts](const Key& k) { return pts.count(k) != 0; };
  }
  if (j.contains("not")) {
    auto inner = parse_predicate(j.at("not"));
    return [inner](const Key& k) { return !inner(k); };
  }
  for (const char* op : {"any", "all"}) {
    if (!j.contains(op)) continue;
    std::vector<std::function<bool(const Key&)>> parts;
    for (const auto& p : j.at(op)) parts.push_back(parse_predicate(p));
    bool any = std::string(op) == "any";
    return [parts, any](const Key& k) {
      for (const auto& f : parts)
        if (f(k) == any) return any;
      return !any;
    };
  }
  if (auto f = kind_predicate(j)) return *f;
  throw Error(Errc::parse_error, "unknown predicate for " + kind() + ": " + j.dump());
}

// ---------------------------------------------------------------- construction

PseudogroupPtr make_example(const std::string& name, const nlohmann::json& params) {
  if (name == "rotation") return make_rotation(params);
  if (name == "zd") return make_zd(params);
  if (name == "shift") return make_shift(params);
  if (name == "tree") return make_tree(params);
  if (name == "custom") return make_custom(params);
  throw Error(Errc::unsupported_name, "unknown pseudogroup example '" + name + "'",
              {{"supported", {"rotation", "zd", "shift", "tree", "custom"}}});
}

PseudogroupPtr parse_example(const std::string& text) {
  auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')')
    throw Error(Errc::parse_error, "example must look like name(argument)");
  std::string name = text.substr(0, open), arg = text.substr(open + 1, text.size() - open - 2);
  if (name == "rotation") return make_rotation({{"alpha", arg}});
  if (name == "zd") {
    try {
      return make_zd({{"d", std::stoll(arg)}});
    } catch (const std::logic_error&) {
      throw Error(Errc::parse_error, "zd needs an integer dimension");
    }
  }
  if (name == "shift") {
    if (arg == "fibonacci") return make_shift({{"word", "fibonacci"}});
    return make_shift({{"word", {{"periodic", arg}}}});
  }
  if (name == "tree") return make_tree({{"code", arg}});
  throw Error(Errc::unsupported_name, "unknown pseudogroup example '" + name + "'");
}

PseudogroupPtr pseudogroup_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error(Errc::parse_error, "pseudogroup JSON needs \"kind\"");
  if (!j.at("kind").is_string()) throw Error(Errc::parse_error, "\"kind\" must be a string");
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  std::shared_ptr<Pseudogroup> pg;
  if (kind == "rotation") {
    pg = make_rotation(params);
  } else if (kind == "zd") {
    pg = make_zd(params);
  } else if (kind == "shift") {
    pg = make_shift(params);
  } else if (kind == "tree") {
    pg = make_tree(params);
  } else if (kind == "custom") {
    pg = make_custom(params);
  } else {
    throw Error(Errc::unsupported_name, "unknown pseudogroup kind '" + kind + "'");
  }
  if (j.contains("basepoints")) {
    std::vector<Key> pts;
    for (const auto& p : j.at("basepoints")) pts.push_back(pg->parse_point(p));
    pg->set_basepoints(std::move(pts));
  }
  return pg;
}

nlohmann::json to_json(const Pseudogroup& pg) {
  nlohmann::json gens = nlohmann::json::array(), base = nlohmann::json::array();
  for (const auto& g : pg.generators()) gens.push_back(g.name);
  for (const Key& k : pg.basepoints()) base.push_back(pg.point_json(k));
  return {{"kind", pg.kind()}, {"params", pg.params()}, {"basepoints", base}, {"generators", gens}};
}

// ---------------------------------------------------------------- orbit graphs

std::unique_ptr<LazyGraph> orbit_graph(const PseudogroupPtr& pg, const Key& x, ExploreLimits limits) {
  auto expand = [pg](const Key& k) {
    std::vector<std::pair<int, Key>> out;
    for (std::size_t g = 0; g < pg->generators().size(); ++g)
      if (auto y = pg->apply(g, k)) out.emplace_back(static_cast<int>(g), std::move(*y));
    return out;
  };
  return std::make_unique<LazyGraph>(x, expand, limits, SpaceKind::lazy_orbit, pg->generators().size(),
                                     "orbit of " + pg->point_json(x).dump() + " under " + pg->describe());
}

OrbitBall orbit_ball(const PseudogroupPtr& pg, const Key& x, std::size_t r, std::size_t max_vertices) {
  auto graph = orbit_graph(pg, x, {.horizon = r + 1, .max_vertices = max_vertices});
  Window w(*graph, graph->root(), r);
  OrbitBall ball;
  ball.center = x;
  ball.radius = r;
  ball.complete = w.complete();
  std::vector<Point> order(w.points().begin(), w.points().end());
  std::vector<Key> keys(graph->known_size());
  for (Point p : order) keys[p.id] = graph->key(p);
  std::sort(order.begin(), order.end(), [&](Point a, Point b) {
    std::size_t da = w.depth(a), db = w.depth(b);
    return da != db ? da < db : keys[a.id] < keys[b.id];
  });
  std::unordered_map<Point, std::size_t, PointHash> index;
  for (Point p : order) {
    index.emplace(p, ball.points.size());
    ball.points.push_back(keys[p.id]);
    ball.depth.push_back(w.depth(p));
  }
  ball.words.assign(order.size(), {});
  std::vector<char> reached(order.size(), 0);
  reached[0] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const LabeledEdge& e : graph->edges(order[i])) {
      auto it = index.find(e.to);
      if (it == index.end()) continue;
      const std::size_t j = it->second;
      ball.edges.push_back({i, static_cast<std::size_t>(e.label), j});
      if (!reached[j] && ball.depth[j] == ball.depth[i] + 1) {
        reached[j] = 1;
        ball.words[j] = ball.words[i];
        ball.words[j].push_back(static_cast<std::size_t>(e.label));
      }
    }
  }
  return ball;
}

ExplicitGraph ball_graph(const OrbitBall& ball) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [i, g, j] : ball.edges)
    if (i != j) edges.emplace(std::min(i, j), std::max(i, j));
  return ExplicitGraph(ball.points.size(), {edges.begin(), edges.end()});
}

namespace {

std::unordered_map<Key, std::size_t, KeyHash> index_of(const OrbitBall& ball) {
  std::unordered_map<Key, std::size_t, KeyHash> out;
  for (std::size_t i = 0; i < ball.points.size(); ++i) out.emplace(ball.points[i], i);
  return out;
}

nlohmann::json word_json(const Pseudogroup& pg, const std::vector<std::size_t>& word) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t g : word) out.push_back(pg.generators()[g].name);
  return out;
}

// All distances between the listed ball points, through the ball's own edges, capped.
std::vector<std::vector<std::uint32_t>> ball_distances(const OrbitBall& ball,
                                                       const std::vector<std::size_t>& pts,
                                                       std::size_t cap) {
  ExplicitGraph g = ball_graph(ball);
  std::vector<Point> ps;
  for (std::size_t i : pts) ps.push_back(Point{static_cast<std::uint32_t>(i)});
  return pairwise_distances(g, ps, ps, cap);
}

}  // namespace

// ---------------------------------------------------------------- recurrence

RecurrenceReport recurrence_radius(const PseudogroupPtr& pg,
                                   const std::function<bool(const Key&)>& target,
                                   const std::vector<Key>& basepoints, std::size_t horizon,
                                   std::optional<std::size_t> sample_radius,
                                   std::size_t max_vertices) {
  if (basepoints.empty()) throw Error(Errc::invalid_argument, "recurrence needs a basepoint");
  RecurrenceReport rep;
  rep.horizon = horizon;
  rep.sample_radius = sample_radius.value_or(2 * horizon);
  std::size_t worst = 0;
  bool failed = false;
  for (const Key& b : basepoints) {
    // A path of length <= horizon from a sampled point stays within sample + horizon of b.
    const std::size_t reach = rep.sample_radius + horizon;
    auto graph = orbit_graph(pg, b, {.horizon = reach + 2, .max_vertices = max_vertices});
    Window w(*graph, graph->root(), reach);
    DenseRegion region(w, 0);
    std::vector<std::uint32_t> sources;
    for (std::uint32_t i = 0; i < region.size(); ++i)
      if (target(graph->key(region.point(i)))) sources.push_back(i);
    std::vector<std::uint32_t> dist(region.size(), kUnreached);
    region.bfs(sources, horizon, [&](std::uint32_t i, std::uint32_t d) {
      dist[i] = d;
      return true;
    });
    std::optional<std::size_t> here = 0;
    for (std::uint32_t i = 0; i < region.size(); ++i) {
      if (region.depth(i) > rep.sample_radius) continue;
      ++rep.points_checked;
      if (dist[i] == kUnreached) {
        if (here && !rep.witness) rep.witness = graph->key(region.point(i));
        here.reset();
        continue;
      }
      if (here) here = std::max<std::size_t>(*here, dist[i]);
    }
    rep.per_basepoint.push_back(here);
    if (here) {
      worst = std::max(worst, *here);
    } else {
      failed = true;
    }
  }
  if (!failed) rep.R = worst;
  return rep;
}

// ---------------------------------------------------------------- Reeb neighborhoods

ReebNeighborhood::ReebNeighborhood(PseudogroupPtr pg, Key x, std::size_t r, std::size_t max_vertices)
    : pg_(std::move(pg)), x_(std::move(x)), r_(r), max_vertices_(max_vertices) {
  inner_ = orbit_ball(pg_, x_, 2 * r_, max_vertices_);
  const std::size_t n = inner_.points.size();
  std::vector<Key> state(n);
  std::set<Key> reads;
  // States along the geodesic words; each word is a parent word plus one letter, so a prefix
  // reached earlier in ball order is reused.
  state[0] = pg_->transport_origin();
  auto index = index_of(inner_);
  for (std::size_t i = 1; i < n; ++i) {
    const auto& word = inner_.words[i];
    std::vector<std::size_t> parent_word(word.begin(), word.end() - 1);
    Key parent = *pg_->apply_word(parent_word, x_);
    auto step = pg_->transport(x_, word.back(), state[index.at(parent)]);
    if (!step) throw Error(Errc::construction_failed, "transport disagrees with the orbit graph");
    state[i] = step->state;
    reads.insert(step->reads.begin(), step->reads.end());
  }
  // Every closed walk at x of length <= 4r uses only edges with d(x,z) + 1 + d(z',x) <= 4r.
  for (const auto& [i, g, j] : inner_.edges) {
    if (inner_.depth[i] + inner_.depth[j] + 1 > 4 * r_) continue;
    auto step = pg_->transport(x_, g, state[i]);
    if (!step) throw Error(Errc::construction_failed, "transport disagrees with the orbit graph");
    reads.insert(step->reads.begin(), step->reads.end());
    if (!pg_->same_action(x_, step->state, state[j])) {
      std::vector<std::size_t> witness = inner_.words[i];
      witness.push_back(g);
      for (auto it = inner_.words[j].rbegin(); it != inner_.words[j].rend(); ++it)
        witness.push_back(pg_->generators()[*it].inverse);
      throw Error(Errc::holonomy_obstruction,
                  "a closed walk of length " + std::to_string(witness.size()) +
                      " fixes the point but not its neighbors",
                  {{"point", pg_->point_json(x_)}, {"word", word_json(*pg_, witness)}});
    }
  }
  reads_.assign(reads.begin(), reads.end());
}

bool ReebNeighborhood::contains(const Key& y) const { return pg_->agrees(x_, y, reads_); }

nlohmann::json ReebNeighborhood::descriptor() const {
  return {{"center", pg_->point_json(x_)},
          {"r", r_},
          {"neighborhood", pg_->neighborhood_json(x_, reads_)},
          {"reads", reads_.size()}};
}

ReebMap ReebNeighborhood::map_to(const Key& y) const {
  if (!contains(y)) throw Error(Errc::invalid_argument, "point is outside V(x, r)");
  ReebMap m;
  m.x = x_;
  m.y = y;
  m.r = r_;
  const std::size_t n = inner_.points.size();
  std::vector<Key> image(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto z = pg_->apply_word(inner_.words[i], y);
    if (!z) throw Error(Errc::construction_failed, "a word defined at x is undefined at y");
    image[i] = std::move(*z);
  }
  for (const auto& [i, g, j] : inner_.edges) {
    if (inner_.depth[i] + inner_.depth[j] + 1 > 4 * r_) continue;
    auto z = pg_->apply(g, image[i]);
    if (!z || *z != image[j]) m.edges_preserved = false;
  }
  std::vector<std::size_t> small;
  for (std::size_t i = 0; i < n; ++i)
    if (inner_.depth[i] <= r_) small.push_back(i);
  for (std::size_t i : small) m.pairs.emplace_back(inner_.points[i], image[i]);

  OrbitBall target = orbit_ball(pg_, y, 2 * r_, max_vertices_);
  auto tindex = index_of(target);
  std::vector<std::size_t> tsmall;
  for (std::size_t i : small) tsmall.push_back(tindex.at(image[i]));
  auto dx = ball_distances(inner_, small, 2 * r_);
  auto dy = ball_distances(target, tsmall, 2 * r_);
  std::set<Key> hit;
  for (std::size_t a = 0; a < small.size(); ++a) {
    hit.insert(image[small[a]]);
    for (std::size_t b = 0; b < small.size(); ++b) {
      ++m.pairs_checked;
      if (dy[a][b] > dx[a][b]) m.non_expanding = false;
      if (dy[a][b] != dx[a][b]) m.isometric = false;
    }
  }
  std::size_t target_small = 0;
  for (std::size_t d : target.depth) target_small += d <= r_;
  if (hit.size() != small.size() || hit.size() != target_small) m.isometric = false;
  return m;
}

// ---------------------------------------------------------------- limit sets

std::size_t grid_depth(const Rational& eps) {
  if (eps <= 0 || eps > 1) throw Error(Errc::invalid_argument, "resolution must lie in (0, 1]");
  std::size_t d = 0;
  while (Rational(1, std::int64_t{1} << d) > eps) {
    if (++d > 40) throw Error(Errc::resolution_unreachable, "resolution finer than 2^-40", {{"eps", to_string(eps)}});
  }
  return d;
}

LimitSample limit_set_sample(const PseudogroupPtr& pg, const std::vector<ObservationWindow>& windows,
                             const Rational& eps, std::size_t max_vertices) {
  if (windows.empty()) throw Error(Errc::invalid_argument, "limit set sample needs windows");
  LimitSample out;
  out.depth = grid_depth(eps);
  std::optional<std::set<Key>> common;
  for (const ObservationWindow& w : windows) {
    OrbitBall ball = orbit_ball(pg, w.center, w.radius, max_vertices);
    std::set<Key> cells;
    for (const Key& z : ball.points)
      if (auto c = pg->cell(z, out.depth)) cells.insert(std::move(*c));
    out.cells_per_window.push_back(cells.size());
    if (!common) {
      common = std::move(cells);
    } else {
      std::set<Key> both;
      std::set_intersection(common->begin(), common->end(), cells.begin(), cells.end(),
                            std::inserter(both, both.begin()));
      common = std::move(both);
    }
  }
  out.cells.assign(common->begin(), common->end());
  return out;
}

// ---------------------------------------------------------------- doubling

PseudogroupPtr double_of(const PseudogroupPtr& base) { return make_double(base); }

GroupDouble group_double(const PseudogroupPtr& base, std::size_t radius) {
  GroupDouble out;
  out.doubled = double_of(base);
  DoubleReport& rep = out.report;
  for (const auto& g : out.doubled->generators()) rep.generators.push_back(g.name);
  bool first = true;
  for (const Key& b : base->basepoints()) {
    // Pairs in B̄_E(b, R) are joined by geodesics inside B̄_E(b, 2R); in the doubled orbit the
    // images sit within R + 1 of ι₀(b) and d_F <= 2R + 1 is checked inside radius 3R + 2.
    OrbitBall eball = orbit_ball(base, b, 2 * radius);
    Key b0 = b;
    b0.push_back(0);
    OrbitBall fball = orbit_ball(out.doubled, b0, 3 * radius + 2);
    auto findex = index_of(fball);
    for (const Key& w : fball.points) {
      ++rep.points_checked;
      for (std::size_t g = 0; g < out.doubled->generators().size(); ++g) {
        auto once = out.doubled->apply(g, w);
        auto twice = once ? out.doubled->apply(g, *once) : std::nullopt;
        if (!twice || *twice != w) rep.involutions_ok = false;
      }
    }
    std::vector<std::size_t> es, fs;
    std::vector<bool> missing;
    for (std::size_t i = 0; i < eball.points.size(); ++i) {
      if (eball.depth[i] > radius) continue;
      es.push_back(i);
      Key z0 = eball.points[i];
      z0.push_back(0);
      auto it = findex.find(z0);
      missing.push_back(it == findex.end());
      fs.push_back(it == findex.end() ? 0 : it->second);
    }
    auto de = ball_distances(eball, es, 2 * radius);
    auto df = ball_distances(fball, fs, 2 * radius + 1);
    for (std::size_t a = 0; a < es.size(); ++a) {
      for (std::size_t c = a + 1; c < es.size(); ++c) {
        ++rep.pairs_checked;
        const long e = de[a][c];
        const long f = (missing[a] || missing[c] || df[a][c] == kUnreached) ? e + 2 : static_cast<long>(df[a][c]);
        const long gap = f - e;
        if (first) {
          rep.min_gap = rep.max_gap = gap;
          first = false;
        }
        rep.min_gap = std::min(rep.min_gap, gap);
        rep.max_gap = std::max(rep.max_gap, gap);
        if ((gap < 0 || gap > 1) && !rep.violation) {
          rep.bounds_ok = false;
          rep.violation = {eball.points[es[a]], eball.points[es[c]]};
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- rotation demo

RotationDemo rotation_demo(const PseudogroupPtr& pg, std::size_t n_max, std::size_t max_steps) {
  const auto* rot = dynamic_cast<const RotationPseudogroup*>(pg.get());
  if (!rot) throw Error(Errc::invalid_argument, "the rotation demo needs a rotation example");
  const QuadField& F = rot->field();
  RotationDemo demo;
  demo.measure_bound = 0;
  struct Arc {
    Rational lo, hi;
  };
  std::vector<Arc> arcs;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto m = static_cast<std::int64_t>(n);
    Rational len(1, (2 * m + 1) * (std::int64_t{1} << (m + 2)));
    Rational lo(m, static_cast<std::int64_t>(n_max) + 1);
    arcs.push_back({lo, lo + len});
    demo.measure_bound += len * (2 * m + 1);
  }
  // p ∈ h^i(I_m) iff p − iα ∈ I_m.
  auto in_A = [&](const Quad& p) {
    for (std::size_t m = 1; m <= n_max; ++m) {
      const auto mm = static_cast<std::int64_t>(m);
      for (std::int64_t i = -mm; i <= mm; ++i) {
        Quad back = F.frac(F.sub(p, F.scale(rot->alpha(), i)));
        if (rot->in_arc(back, arcs[m - 1].lo, arcs[m - 1].hi, true)) return true;
      }
    }
    return false;
  };
  const Quad base = rot->decode(pg->basepoints().front());
  for (std::size_t n = 1; n <= n_max; ++n) {
    const Arc& I = arcs[n - 1];
    RotationDemoRow row;
    row.n = n;
    row.arc_lo = I.lo;
    row.arc_hi = I.hi;
    Quad fwd = base, bwd = base;
    bool found = false;
    for (std::size_t k = 0; k <= max_steps && !found; ++k) {
      if (rot->in_arc(fwd, I.lo, I.hi, true)) {
        row.x = rot->encode(fwd);
        row.steps = static_cast<long>(k);
        found = true;
      } else if (rot->in_arc(bwd, I.lo, I.hi, true)) {
        row.x = rot->encode(bwd);
        row.steps = -static_cast<long>(k);
        found = true;
      }
      fwd = F.frac(F.add(fwd, rot->alpha()));
      bwd = F.frac(F.sub(bwd, rot->alpha()));
    }
    if (!found)
      throw Error(Errc::construction_failed, "the orbit misses I_n within the step budget",
                  {{"n", n}, {"max_steps", max_steps}});
    OrbitBall ball = orbit_ball(pg, row.x, n);
    std::set<Key> segment;
    const auto nn = static_cast<std::int64_t>(n);
    for (std::int64_t i = -nn; i <= nn; ++i)
      segment.insert(rot->encode(F.frac(F.add(rot->decode(row.x), F.scale(rot->alpha(), i)))));
    std::set<Key> got(ball.points.begin(), ball.points.end());
    row.ball_is_orbit_segment = got == segment;
    row.ball_size = ball.points.size();
    row.ball_in_A = std::all_of(ball.points.begin(), ball.points.end(),
                                [&](const Key& k) { return in_A(rot->decode(k)); });
    demo.rows.push_back(row);
  }
  return demo;
}

// ---------------------------------------------------------------- JSON

nlohmann::json to_json(const Pseudogroup& pg, const OrbitBall& ball) {
  nlohmann::json pts = nlohmann::json::array(), edges = nlohmann::json::array();
  for (std::size_t i = 0; i < ball.points.size(); ++i)
    pts.push_back({{"point", pg.point_json(ball.points[i])},
                   {"depth", ball.depth[i]},
                   {"word", word_json(pg, ball.words[i])}});
  for (const auto& [i, g, j] : ball.edges) edges.push_back({i, pg.generators()[g].name, j});
  return {{"center", pg.point_json(ball.center)},
          {"radius", ball.radius},
          {"size", ball.points.size()},
          {"complete", ball.complete},
          {"points", pts},
          {"edges", edges}};
}

nlohmann::json to_json(const Pseudogroup& pg, const RecurrenceReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& v : r.per_basepoint) per.push_back(v ? nlohmann::json(*v) : nlohmann::json());
  return {{"R", r.R ? nlohmann::json(*r.R) : nlohmann::json()},
          {"horizon", r.horizon},
          {"sample_radius", r.sample_radius},
          {"points_checked", r.points_checked},
          {"sampled", r.sampled},
          {"per_basepoint", per},
          {"witness", r.witness ? pg.point_json(*r.witness) : nlohmann::json()}};
}

nlohmann::json to_json(const Pseudogroup& pg, const ReebMap& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : m.pairs) pairs.push_back({pg.point_json(a), pg.point_json(b)});
  return {{"x", pg.point_json(m.x)},
          {"y", pg.point_json(m.y)},
          {"r", m.r},
          {"map", pairs},
          {"pairs_checked", m.pairs_checked},
          {"edges_preserved", m.edges_preserved},
          {"non_expanding", m.non_expanding},
          {"isometric", m.isometric}};
}

nlohmann::json to_json(const Pseudogroup& pg, const LimitSample& s) {
  nlohmann::json cells = nlohmann::json::array();
  for (const Key& c : s.cells) cells.push_back(pg.cell_json(c, s.depth));
  return {{"depth", s.depth}, {"cells", cells}, {"cell_count", s.cells.size()}, {"cells_per_window", s.cells_per_window}};
}

nlohmann::json to_json(const Pseudogroup& pg, const DoubleReport& r) {
  nlohmann::json v;
  if (r.violation) v = {pg.point_json(r.violation->first), pg.point_json(r.violation->second)};
  return {{"generators", r.generators},
          {"involutions_ok", r.involutions_ok},
          {"pairs_checked", r.pairs_checked},
          {"points_checked", r.points_checked},
          {"min_gap", r.min_gap},
          {"max_gap", r.max_gap},
          {"bounds_ok", r.bounds_ok},
          {"violation", v}};
}

nlohmann::json to_json(const Pseudogroup& pg, const RotationDemo& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : d.rows)
    rows.push_back({{"n", row.n},
                    {"arc", {to_string(row.arc_lo), to_string(row.arc_hi)}},
                    {"x", pg.point_json(row.x)},
                    {"steps", row.steps},
                    {"ball_size", row.ball_size},
                    {"ball_is_orbit_segment", row.ball_is_orbit_segment},
                    {"ball_in_A", row.ball_in_A}});
  return {{"measure_bound", to_string(d.measure_bound)}, {"rows", rows}};
}

}  // namespace coarse
