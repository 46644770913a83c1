#include "coarse/cqi.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_set>

#include "coarse/error.hpp"
#include "coarse/serialize.hpp"

namespace coarse {

namespace {

constexpr std::size_t kMaxViolations = 10;
constexpr std::size_t kNoCap = std::numeric_limits<std::size_t>::max();

std::size_t floor_size(const Rational& q) {
  if (q < 0) throw Error(Errc::invalid_argument, "negative constant " + to_string(q));
  return static_cast<std::size_t>(floor_of(q));
}

void record(std::vector<Violation>& out, Violation v) {
  if (out.size() < kMaxViolations) out.push_back(std::move(v));
}

// BFS order over the window's induced subgraph from start; ties canonical.
std::vector<Point> window_order(const Window& w, Point start) {
  const Space& space = w.space();
  std::vector<Point> order;
  std::unordered_set<Point, PointHash> seen{start};
  std::vector<Point> layer{start};
  while (!layer.empty()) {
    canonical_sort(space, layer);
    order.insert(order.end(), layer.begin(), layer.end());
    std::vector<Point> next;
    for (Point p : layer) {
      for (Point q : space.neighbors(p)) {
        if (w.contains(q) && seen.insert(q).second) next.push_back(q);
      }
    }
    layer = std::move(next);
  }
  std::vector<Point> rest;
  for (Point p : w.points()) {
    if (!seen.count(p)) rest.push_back(p);
  }
  canonical_sort(space, rest);
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

std::vector<Point> canonical(const Space& space, const PointSet& s) {
  std::vector<Point> v(s.begin(), s.end());
  canonical_sort(space, v);
  return v;
}

}  // namespace

PartialBijection::PartialBijection(std::vector<std::pair<Point, Point>> pairs) {
  fwd_ = std::move(pairs);
  std::sort(fwd_.begin(), fwd_.end());
  for (std::size_t i = 1; i < fwd_.size(); ++i) {
    if (fwd_[i].first == fwd_[i - 1].first) {
      throw Error(Errc::invalid_argument, "partial bijection assigns a source twice");
    }
  }
  bwd_.reserve(fwd_.size());
  for (auto [x, y] : fwd_) bwd_.emplace_back(y, x);
  std::sort(bwd_.begin(), bwd_.end());
  for (std::size_t i = 1; i < bwd_.size(); ++i) {
    if (bwd_[i].first == bwd_[i - 1].first) {
      throw Error(Errc::invalid_argument, "partial bijection is not injective");
    }
  }
}

namespace {
const std::pair<Point, Point>* lookup(const std::vector<std::pair<Point, Point>>& v, Point x) {
  auto it = std::lower_bound(v.begin(), v.end(), x,
                             [](const std::pair<Point, Point>& e, Point p) { return e.first < p; });
  if (it == v.end() || it->first != x) return nullptr;
  return &*it;
}
}  // namespace

bool PartialBijection::defined(Point x) const { return lookup(fwd_, x) != nullptr; }

Point PartialBijection::operator()(Point x) const {
  const auto* e = lookup(fwd_, x);
  if (!e) throw Error(Errc::invalid_argument, "map undefined at point");
  return e->second;
}

std::optional<Point> PartialBijection::inverse(Point y) const {
  const auto* e = lookup(bwd_, y);
  if (!e) return std::nullopt;
  return e->second;
}

PointSet PartialBijection::domain() const {
  PointSet out;
  out.reserve(fwd_.size());
  for (auto [x, _] : fwd_) out.push_back(x);
  return out;
}

PointSet PartialBijection::image() const {
  PointSet out;
  out.reserve(bwd_.size());
  for (auto [y, _] : bwd_) out.push_back(y);
  return out;
}

PartialBijection PartialBijection::restrict_to(const PointSet& s) const {
  std::vector<std::pair<Point, Point>> out;
  for (auto e : fwd_) {
    if (contains(s, e.first)) out.push_back(e);
  }
  return PartialBijection(std::move(out));
}

PartialBijection PartialBijection::inverted() const { return PartialBijection(bwd_); }

bool is_net(const Window& window, const PointSet& s, std::size_t K) {
  DistanceMap dist = distances_from(window.space(), s, K);
  for (Point p : window.points()) {
    if (window.in_core(p, K) && !dist.count(p)) return false;
  }
  return true;
}

CqiReport verify_cqi(const PartialBijection& f, const Window& source, const Window& target,
                     const Distortion& d) {
  CqiReport rep;
  const std::size_t K = floor_size(d.K);
  auto check_net = [&](const Window& w, const PointSet& s, bool& ok, std::size_t& censored) {
    DistanceMap dist = distances_from(w.space(), s, K);
    for (Point p : w.points()) {
      if (!w.in_core(p, K)) {
        ++censored;
        continue;
      }
      if (!dist.count(p)) {
        ok = false;
        if (rep.uncovered.size() < kMaxViolations) rep.uncovered.push_back(w.space().key(p));
      }
    }
  };
  check_net(source, f.domain(), rep.domain_net_ok, rep.rim_censored_domain);
  check_net(target, f.image(), rep.image_net_ok, rep.rim_censored_image);

  std::vector<Point> xs, ys;
  for (auto [x, y] : f.pairs()) {
    xs.push_back(x);
    ys.push_back(y);
  }
  const DistanceMap rs = geodesic_region(source), rt = geodesic_region(target);
  auto ds = pairwise_distances(source.space(), xs, xs, kNoCap, &rs);
  auto dt = pairwise_distances(target.space(), ys, ys, kNoCap, &rt);
  const std::int64_t cn = d.C.numerator(), cd = d.C.denominator();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      ++rep.pairs_checked;
      std::uint32_t a = ds[i][j], b = dt[i][j];
      bool good;
      if (a == kUnreached || b == kUnreached) {
        good = (a == b);
      } else {
        good = static_cast<std::int64_t>(b) * cd <= cn * static_cast<std::int64_t>(a) &&
               static_cast<std::int64_t>(a) * cd <= cn * static_cast<std::int64_t>(b);
      }
      if (!good) {
        rep.bilip_ok = false;
        record(rep.violations, {"bilipschitz", {source.space().key(xs[i]), source.space().key(xs[j])}, a, b});
      }
    }
  }
  return rep;
}

PointSet separated_subnet(const Window& window, const PointSet& candidates, std::size_t K,
                          std::optional<Point> first) {
  const Space& space = window.space();
  if (first && !contains(candidates, *first)) {
    throw Error(Errc::invalid_argument, "net basepoint is not a candidate");
  }
  Point start = first ? *first : window.center();
  if (!window.contains(start)) throw Error(Errc::invalid_argument, "net basepoint outside window");
  std::vector<Point> order;
  for (Point p : window_order(window, start)) {
    if (contains(candidates, p)) order.push_back(p);
  }
  std::vector<Point> outside;
  for (Point p : candidates) {
    if (!window.contains(p)) outside.push_back(p);
  }
  canonical_sort(space, outside);
  order.insert(order.end(), outside.begin(), outside.end());

  std::unordered_set<Point, PointHash> blocked;
  std::vector<Point> chosen;
  for (Point p : order) {
    if (blocked.count(p)) continue;
    chosen.push_back(p);
    for (Point q : ball(space, p, K)) blocked.insert(q);
  }
  return make_set(std::move(chosen));
}

PointSet separated_net(const Window& window, std::size_t K, Point x0) {
  return separated_subnet(window, window.points(), K, x0);
}

MatchingResult net_matching(const Window& window, const PointSet& a1, const PointSet& a2,
                            std::size_t K, std::optional<std::pair<Point, Point>> pin) {
  const Space& space = window.space();
  if (!is_net(window, a1, K)) throw Error(Errc::not_a_net, "first set is not a K-net of the window", {{"K", K}});
  if (!is_net(window, a2, K)) throw Error(Errc::not_a_net, "second set is not a K-net of the window", {{"K", K}});
  if (pin) {
    if (!contains(a1, pin->first) || !contains(a2, pin->second)) {
      throw Error(Errc::invalid_argument, "pin points must lie in the respective nets");
    }
    if (!distance(space, pin->first, pin->second, 2 * K)) {
      throw Error(Errc::pin_too_far, "pinned points are farther apart than 2K", {{"K", K}});
    }
  }
  MatchingResult out;
  out.subnet1 = separated_subnet(window, a1, K, pin ? std::optional<Point>(pin->first) : std::nullopt);
  out.subnet2 = separated_subnet(window, a2, K, pin ? std::optional<Point>(pin->second) : std::nullopt);
  std::vector<Point> targets = canonical(space, out.subnet2);
  auto nearest = nearest_sources(space, targets, out.subnet1, 2 * K);

  std::map<Point, std::vector<Point>> preimages;
  for (Point x : out.subnet1) {
    if (pin && x == pin->first) {
      preimages[pin->second].push_back(x);
      continue;
    }
    const NearestSource& ns = nearest.at(x);
    if (ns.distance == kUnreached || ns.distance > 2 * K) {
      ++out.unmatched;
      continue;
    }
    preimages[targets[ns.source]].push_back(x);
  }
  std::vector<std::pair<Point, Point>> pairs;
  for (auto& [y, xs] : preimages) {
    Point chosen;
    if (pin && y == pin->second) {
      chosen = pin->first;
    } else {
      canonical_sort(space, xs);
      chosen = xs.front();
    }
    pairs.emplace_back(chosen, y);
  }
  out.h = PartialBijection(std::move(pairs));
  out.claimed = Distortion{Rational(6 * static_cast<std::int64_t>(K)), Rational(5)};
  return out;
}

CompositeResult coarse_composite(const PartialBijection& f, const PartialBijection& f2,
                                 const Window& w, const Window& w1, const Window& w2,
                                 const Distortion& d, std::optional<std::pair<Point, Point>> pin) {
  CqiReport r1 = verify_cqi(f, w, w1, d), r2 = verify_cqi(f2, w1, w2, d);
  if (!r1.ok() || !r2.ok()) {
    throw Error(Errc::distortion_mismatch, "inputs do not verify at the common distortion",
                {{"first", to_json(r1)}, {"second", to_json(r2)}});
  }
  std::optional<std::pair<Point, Point>> inner;
  if (pin) {
    if (!f.defined(pin->first)) throw Error(Errc::invalid_argument, "pin source outside dom f");
    inner = std::make_pair(f(pin->first), pin->second);
  }
  CompositeResult out;
  out.matching = net_matching(w1, f.image(), f2.domain(), floor_size(d.K), inner);
  std::vector<std::pair<Point, Point>> pairs;
  for (auto [a, b] : out.matching.h.pairs()) {
    pairs.emplace_back(*f.inverse(a), f2(b));
  }
  out.g = PartialBijection(std::move(pairs));
  out.claimed = Distortion{d.K * (5 * d.C + 1), 5 * d.C * d.C};
  return out;
}

namespace {

PointMap nearest_extension(const PartialBijection& f, const Window& w, bool forward) {
  const Space& space = w.space();
  std::vector<Point> sources = canonical(space, forward ? f.domain() : f.image());
  const DistanceMap region = geodesic_region(w);
  auto nearest = nearest_sources(space, sources, w.points(), kNoCap, &region);
  PointMap out;
  for (Point p : w.points()) {
    const NearestSource& ns = nearest.at(p);
    if (ns.distance == kUnreached) continue;
    Point s = sources[ns.source];
    out.emplace(p, forward ? f(s) : *f.inverse(s));
  }
  return out;
}

}  // namespace

LslResult lsl_from_cqi(const PartialBijection& f, const Window& source, const Window& target,
                       const Distortion& d) {
  if (f.empty()) throw Error(Errc::empty_set, "empty map");
  LslResult out;
  out.phi = nearest_extension(f, source, true);
  out.psi = nearest_extension(f, target, false);
  out.claimed = LslConstants{d.C, 2 * d.C * d.K, d.K};
  return out;
}

LslReport verify_lsl(const PointMap& phi, const PointMap& psi, const Window& source,
                     const Window& target, const LslConstants& k, std::size_t margin) {
  LslReport rep;
  auto check_lipschitz = [&](const PointMap& m, const Window& from, const Window& to,
                             const char* kind) {
    std::vector<Point> xs, ys;
    for (Point p : from.core(margin)) {
      auto it = m.find(p);
      if (it == m.end()) {
        rep.ok = false;
        record(rep.violations, {std::string(kind) + "-undefined", {from.space().key(p)}});
        continue;
      }
      xs.push_back(p);
      ys.push_back(it->second);
    }
    const DistanceMap rf = geodesic_region(from), rt = geodesic_region(to);
    auto ds = pairwise_distances(from.space(), xs, xs, kNoCap, &rf);
    auto dt = pairwise_distances(to.space(), ys, ys, kNoCap, &rt);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = i + 1; j < xs.size(); ++j) {
        ++rep.pairs_checked;
        std::uint32_t a = ds[i][j], b = dt[i][j];
        if (a == kUnreached) continue;
        if (b == kUnreached || Rational(b) > k.lambda * static_cast<std::int64_t>(a) + k.b) {
          rep.ok = false;
          record(rep.violations, {std::string(kind) + "-lipschitz",
                                  {from.space().key(xs[i]), from.space().key(xs[j])}, a, b});
        }
      }
    }
  };
  check_lipschitz(phi, source, target, "phi");
  check_lipschitz(psi, target, source, "psi");

  const std::size_t cap = floor_size(k.c);
  auto check_close = [&](const PointMap& first, const PointMap& second, const Window& w,
                         const char* kind) {
    for (Point p : w.core(margin)) {
      auto a = first.find(p);
      if (a == first.end()) continue;
      auto b = second.find(a->second);
      if (b == second.end()) {
        rep.ok = false;
        record(rep.violations, {std::string(kind) + "-leaves-window", {w.space().key(p)}});
        continue;
      }
      if (!distance(w.space(), p, b->second, cap)) {
        rep.ok = false;
        record(rep.violations, {std::string(kind) + "-not-close", {w.space().key(p), w.space().key(b->second)}});
      }
    }
  };
  check_close(phi, psi, source, "psi-phi");
  check_close(psi, phi, target, "phi-psi");
  return rep;
}

Rational default_epsilon(const LslConstants& k) { return 2 * k.c + k.b + 1; }

Distortion distortion_from_lsl(const LslConstants& k, const Rational& eps) {
  const Rational& l = k.lambda;
  return Distortion{k.c + 2 * l * k.c + l * k.b + l * eps + k.b, l + (l / eps) * (2 * k.c + k.b)};
}

CqiResult cqi_from_lsl(const PointMap& phi, const PointMap& psi, const Window& source,
                       const Window& target, const LslConstants& k,
                       std::optional<Rational> epsilon, Point x0, std::size_t margin) {
  Rational eps = epsilon ? *epsilon : default_epsilon(k);
  if (eps <= 0) throw Error(Errc::invalid_argument, "epsilon must be positive");
  if (k.lambda < 1 || k.b < 0 || k.c < 0) throw Error(Errc::invalid_argument, "invalid LSL constants");
  LslReport rep = verify_lsl(phi, psi, source, target, k, margin);
  if (!rep.ok) {
    const Violation& v = rep.violations.front();
    nlohmann::json pts = nlohmann::json::array();
    for (const Key& key : v.points) pts.push_back(key_to_json(key));
    throw Error(Errc::equivalence_check_failed, "maps are not a large-scale Lipschitz equivalence",
                {{"kind", v.kind}, {"points", pts}});
  }
  CqiResult out;
  out.epsilon = eps;
  out.separation = 2 * k.c + k.b + eps;
  PointSet candidates = source.core(margin);
  if (!contains(candidates, x0)) throw Error(Errc::invalid_argument, "x0 outside the checked core");
  PointSet a = separated_subnet(source, candidates, floor_size(out.separation), x0);
  std::vector<std::pair<Point, Point>> pairs;
  for (Point p : a) pairs.emplace_back(p, phi.at(p));
  try {
    out.f = PartialBijection(std::move(pairs));
  } catch (const Error&) {
    throw Error(Errc::equivalence_check_failed, "restriction to the separated net is not injective");
  }
  out.claimed = distortion_from_lsl(k, eps);
  return out;
}

CloseReport verify_close(const PartialBijection& f, const PartialBijection& g,
                         const Window& source, const Window& target, const Rational& r,
                         const Rational& s, std::size_t margin) {
  CloseReport rep;
  const std::size_t rr = floor_size(r), ss = floor_size(s);
  const PointSet gdom = g.domain();
  for (auto [x, fx] : f.pairs()) {
    if (!source.in_core(x, margin)) continue;
    ++rep.checked;
    DistanceMap near = distances_from(source.space(), PointSet{x}, rr);
    DistanceMap around = distances_from(target.space(), PointSet{fx}, ss);
    bool found = false;
    for (const auto& [y, _] : near) {
      if (contains(gdom, y) && around.count(g(y))) {
        found = true;
        break;
      }
    }
    if (!found) {
      rep.ok = false;
      record(rep.violations, {"not-close", {source.space().key(x)}});
    }
  }
  return rep;
}

RebaseResult rebase_cqi(const PartialBijection& f, const Window& source, const Window& target,
                        const Distortion& d, Point x0, Point x0p, std::size_t R,
                        std::optional<Rational> epsilon) {
  const Space& m = source.space();
  const Space& mp = target.space();
  std::optional<Point> anchor;
  std::vector<Point> near = ball(m, x0, R);
  canonical_sort(m, near);
  for (Point y : near) {
    if (f.defined(y) && distance(mp, x0p, f(y), R)) {
      anchor = y;
      break;
    }
  }
  if (!anchor) throw Error(Errc::no_anchor, "no domain point near both basepoints", {{"R", R}});
  const std::size_t K = floor_size(d.K);
  if (!source.in_core(x0, K) || !target.in_core(x0p, K)) {
    throw Error(Errc::margin_too_small, "basepoints too close to the window rim");
  }
  LslResult lsl = lsl_from_cqi(f, source, target, d);
  lsl.phi[x0] = x0p;
  lsl.psi[x0p] = x0;
  const Rational C = d.C, Kr = d.K, Rr(static_cast<std::int64_t>(R));
  const Rational Rp = C * Rr + 2 * C * Kr + Rr;
  LslConstants shifted{C, 2 * C * Kr + Rp, C * Rp + 2 * C * Kr + 2 * Kr};
  Rational eps = epsilon ? *epsilon : default_epsilon(shifted);
  CqiResult res = cqi_from_lsl(lsl.phi, lsl.psi, source, target, shifted, eps, x0, K);
  RebaseResult out;
  out.f = std::move(res.f);
  out.claimed = res.claimed;
  out.shifted = shifted;
  out.epsilon = eps;
  out.anchor = *anchor;
  out.r = res.claimed.K;
  out.s = Rp + res.claimed.C * res.claimed.K + shifted.b;
  return out;
}

AaResult aa_limit(const std::vector<ChainStep>& chain, const Space& source, const Space& target,
                  const Distortion& d, std::size_t L, std::optional<std::size_t> depth) {
  const std::size_t N = chain.size();
  const std::size_t D = depth ? *depth : N;
  if (D == 0 || D > N) throw Error(Errc::invalid_argument, "ray depth must be between 1 and the chain length");
  using Restriction = std::vector<std::pair<Key, Key>>;
  // restriction of f_n to F_m, or nullopt if f_n(F_m ∩ dom) != F'_m ∩ im
  auto restrict = [&](std::size_t m, std::size_t n) -> std::optional<Restriction> {
    const ChainStep& step = chain[n];
    std::vector<Point> image;
    Restriction r;
    for (auto [x, y] : step.f.pairs()) {
      if (contains(chain[m].F, x)) {
        image.push_back(y);
        r.emplace_back(source.key(x), target.key(y));
      }
    }
    if (make_set(image) != set_intersection(chain[m].Fp, step.f.image())) return std::nullopt;
    std::sort(r.begin(), r.end());
    return r;
  };
  std::vector<std::vector<std::optional<Restriction>>> table(D, std::vector<std::optional<Restriction>>(N));
  for (std::size_t m = 0; m < D; ++m) {
    for (std::size_t n = m; n < N; ++n) table[m][n] = restrict(m, n);
  }
  std::size_t reached = 0;
  for (std::size_t dd = 1; dd <= D; ++dd) {
    bool alive = false;
    for (std::size_t n = dd - 1; n < N && !alive; ++n) {
      bool all = true;
      for (std::size_t m = 0; m < dd && all; ++m) all = table[m][n].has_value();
      alive = all;
    }
    if (!alive) break;
    reached = dd;
  }
  if (reached < D) {
    throw Error(Errc::no_infinite_ray, "restriction tree dies before the requested depth",
                {{"depth_reached", reached}, {"depth", D}});
  }
  std::optional<std::size_t> best;
  auto sequence_less = [&](std::size_t a, std::size_t b) {
    for (std::size_t m = 0; m < D; ++m) {
      if (*table[m][a] != *table[m][b]) return *table[m][a] < *table[m][b];
    }
    return false;
  };
  for (std::size_t n = D - 1; n < N; ++n) {
    bool all = true;
    for (std::size_t m = 0; m < D && all; ++m) all = table[m][n].has_value();
    if (!all) continue;
    if (!best || sequence_less(n, *best)) best = n;
  }
  AaResult out;
  out.depth = D;
  for (std::size_t m = 0; m < D; ++m) {
    for (std::size_t n = m; n < N; ++n) {
      if (table[m][n] && *table[m][n] == *table[m][*best]) {
        out.indices.push_back(n);
        break;
      }
    }
  }
  std::vector<std::pair<Point, Point>> pairs;
  for (auto [x, y] : chain[*best].f.pairs()) {
    if (contains(chain[D - 1].F, x)) pairs.emplace_back(x, y);
  }
  out.g = PartialBijection(std::move(pairs));
  out.claimed = Distortion{d.K + static_cast<std::int64_t>(L), d.C};
  return out;
}

RoughProfile rough_profile(const PointMap& phi, const Window& source, const Space& target,
                           std::size_t r_max) {
  std::vector<Point> xs, ys;
  for (Point p : source.points()) {
    auto it = phi.find(p);
    if (it == phi.end()) throw Error(Errc::invalid_argument, "map is not total on the window");
    xs.push_back(p);
    ys.push_back(it->second);
  }
  const DistanceMap region = geodesic_region(source);
  auto ds = pairwise_distances(source.space(), xs, xs, kNoCap, &region);
  auto dt = pairwise_distances(target, ys, ys, kNoCap);
  std::uint32_t diam = 0;
  for (const auto& row : ds)
    for (std::uint32_t v : row)
      if (v != kUnreached) diam = std::max(diam, v);
  RoughProfile out;
  out.s.assign(r_max + 1, 0);
  out.t.assign(r_max + 1, 0);
  out.t_unbounded.assign(r_max + 1, false);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      std::uint32_t a = ds[i][j], b = dt[i][j];
      for (std::size_t r = 0; r <= r_max; ++r) {
        if (a != kUnreached && a <= r) out.s[r] = std::max(out.s[r], b);
        if (b != kUnreached && b <= r) out.t[r] = std::max(out.t[r], a);
      }
    }
  }
  for (std::size_t r = 0; r <= r_max; ++r) out.t_unbounded[r] = diam > 0 && out.t[r] >= diam && r < diam;
  return out;
}

std::vector<std::uint32_t> rough_bar(const RoughProfile& profile, std::size_t K) {
  std::vector<std::uint32_t> out;
  const std::uint32_t k2 = 2 * static_cast<std::uint32_t>(K);
  for (std::size_t r = 0; r + 2 * K < profile.s.size(); ++r) {
    std::uint32_t base = profile.combined(r);
    out.push_back(std::max(profile.combined(r + 2 * K), base == kUnreached ? kUnreached : base + k2));
  }
  return out;
}

RoughEquivalence rough_equivalence(const PointMap& phi, const Window& source, const Window& target,
                                   const RoughProfile& profile, std::size_t K) {
  const Space& m = source.space();
  const Space& mp = target.space();
  std::vector<Point> image_pts;
  for (const auto& [_, y] : phi) image_pts.push_back(y);
  PointSet image = make_set(image_pts);
  if (!is_net(target, image, K)) throw Error(Errc::not_a_net, "image is not a K-net of the target window", {{"K", K}});
  if (profile.s.size() <= K) throw Error(Errc::insufficient_range, "profile shorter than K");

  std::unordered_map<Point, Point, PointHash> least_preimage;
  for (const auto& [x, y] : phi) {
    auto [it, fresh] = least_preimage.emplace(y, x);
    if (!fresh && m.key(x) < m.key(it->second)) it->second = x;
  }
  std::vector<Point> sources = canonical(mp, image);
  PointSet core = target.core(K);
  auto nearest = nearest_sources(mp, sources, core, K);

  RoughEquivalence out;
  for (Point p : core) out.g.emplace(p, least_preimage.at(sources[nearest.at(p).source]));
  out.c = std::max<std::uint32_t>(static_cast<std::uint32_t>(K), profile.combined(K));
  out.s_bar = rough_bar(profile, K);
  for (Point p : core) {
    Point back = phi.at(out.g.at(p));
    if (!distance(mp, p, back, out.c)) {
      out.fg_close = false;
      record(out.violations, {"fg-not-close", {mp.key(p)}});
    }
  }
  for (Point x : source.points()) {
    auto it = out.g.find(phi.at(x));
    if (it == out.g.end()) continue;
    if (!distance(m, x, it->second, out.c)) {
      out.gf_close = false;
      record(out.violations, {"gf-not-close", {m.key(x)}});
    }
  }
  std::vector<Point> xs(core.begin(), core.end()), gs;
  for (Point p : xs) gs.push_back(out.g.at(p));
  const DistanceMap rt = geodesic_region(target), rs = geodesic_region(source);
  auto dt = pairwise_distances(mp, xs, xs, kNoCap, &rt);
  auto ds = pairwise_distances(m, gs, gs, kNoCap, &rs);
  const std::size_t top = out.s_bar.size();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      std::uint32_t a = dt[i][j], b = ds[i][j];
      bool bad = (a != kUnreached && a < top && (b == kUnreached || b > out.s_bar[a])) ||
                 (b != kUnreached && b < top && (a == kUnreached || a > out.s_bar[b]));
      if (bad) {
        out.profile_ok = false;
        record(out.violations, {"profile", {mp.key(xs[i]), mp.key(xs[j])}, b, a});
      }
    }
  }
  return out;
}

nlohmann::json to_json(const PartialBijection& f, const Space& source, const Space& target) {
  std::vector<std::pair<Key, Key>> rows;
  for (auto [x, y] : f.pairs()) rows.emplace_back(source.key(x), target.key(y));
  std::sort(rows.begin(), rows.end());
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : rows) pairs.push_back({key_to_json(a), key_to_json(b)});
  return {{"pairs", pairs}};
}

nlohmann::json to_json(const Distortion& d) {
  return {{"K", rational_to_json(d.K)}, {"C", rational_to_json(d.C)}};
}

nlohmann::json to_json(const CqiReport& r) {
  nlohmann::json v = nlohmann::json::array();
  for (const Violation& x : r.violations) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Key& k : x.points) pts.push_back(key_to_json(k));
    nlohmann::json e = {{"kind", x.kind}, {"points", pts}};
    if (x.d_source != kUnreached) e["d_source"] = x.d_source;
    if (x.d_target != kUnreached) e["d_target"] = x.d_target;
    v.push_back(e);
  }
  return {{"net_ok", r.net_ok()},
          {"domain_net_ok", r.domain_net_ok},
          {"image_net_ok", r.image_net_ok},
          {"bilip_ok", r.bilip_ok},
          {"rim_censored_domain", r.rim_censored_domain},
          {"rim_censored_image", r.rim_censored_image},
          {"pairs_checked", r.pairs_checked},
          {"uncovered", [&] {
             nlohmann::json u = nlohmann::json::array();
             for (const Key& k : r.uncovered) u.push_back(key_to_json(k));
             return u;
           }()},
          {"violations", v}};
}

PartialBijection bijection_from_json(const nlohmann::json& j, const Space& source,
                                     const Space& target) {
  if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array()) {
    throw Error(Errc::parse_error, "map JSON needs a \"pairs\" array");
  }
  std::vector<std::pair<Point, Point>> pairs;
  for (const auto& e : j["pairs"]) {
    if (!e.is_array() || e.size() != 2) throw Error(Errc::parse_error, "map pairs must be [source, target]");
    pairs.emplace_back(source.at(key_from_json(e[0])), target.at(key_from_json(e[1])));
  }
  return PartialBijection(std::move(pairs));
}

}  // namespace coarse
