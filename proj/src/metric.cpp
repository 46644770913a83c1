#include "coarse/metric.hpp"

#include <algorithm>
#include <limits>

#include "coarse/error.hpp"

namespace coarse {

std::size_t KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (std::int64_t v : k) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

PointSet make_set(std::vector<Point> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

bool contains(const PointSet& s, Point p) { return std::binary_search(s.begin(), s.end(), p); }

PointSet set_union(const PointSet& a, const PointSet& b) {
  PointSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet set_intersection(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet set_difference(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const PointSet& a, const PointSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::explicit_graph: return "explicit-graph";
    case SpaceKind::lazy_orbit: return "lazy-orbit";
    case SpaceKind::product: return "product";
  }
  return "unknown";
}

std::vector<Point> Space::neighbors(Point p) const {
  std::vector<LabeledEdge> e = edges(p);
  std::vector<Point> out;
  out.reserve(e.size());
  for (const LabeledEdge& x : e) out.push_back(x.to);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Point Space::at(const Key& k) const {
  std::optional<Point> p = find(k);
  if (!p) throw Error(Errc::invalid_argument, "point not present in " + describe(), {{"key", k}});
  return *p;
}

void canonical_sort(const Space& space, std::vector<Point>& points) {
  std::vector<std::pair<Key, Point>> tagged;
  tagged.reserve(points.size());
  for (Point p : points) tagged.emplace_back(space.key(p), p);
  std::sort(tagged.begin(), tagged.end());
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = tagged[i].second;
}

std::vector<Key> canonical_keys(const Space& space, const PointSet& s) {
  std::vector<Key> out;
  out.reserve(s.size());
  for (Point p : s) out.push_back(space.key(p));
  std::sort(out.begin(), out.end());
  return out;
}

DistanceMap distances_from(const Space& space, const PointSet& sources, std::size_t radius) {
  DistanceMap dist;
  std::vector<Point> frontier;
  for (Point p : sources) {
    if (dist.emplace(p, 0).second) frontier.push_back(p);
  }
  for (std::size_t d = 1; d <= radius && !frontier.empty(); ++d) {
    std::vector<Point> next;
    for (Point p : frontier) {
      for (Point q : space.neighbors(p)) {
        if (dist.emplace(q, static_cast<std::uint32_t>(d)).second) next.push_back(q);
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

PointSet ball(const Space& space, Point x, std::size_t r) {
  DistanceMap d = distances_from(space, PointSet{x}, r);
  std::vector<Point> out;
  out.reserve(d.size());
  for (const auto& [p, _] : d) out.push_back(p);
  return make_set(std::move(out));
}

PointSet open_ball(const Space& space, Point x, std::size_t r) {
  if (r == 0) return {};
  return ball(space, x, r - 1);
}

std::optional<std::size_t> distance(const Space& space, Point x, Point y, std::size_t cap) {
  if (x == y) return 0;
  DistanceMap dist;
  dist.emplace(x, 0);
  std::vector<Point> frontier{x};
  for (std::size_t d = 1; d <= cap && !frontier.empty(); ++d) {
    std::vector<Point> next;
    for (Point p : frontier) {
      for (Point q : space.neighbors(p)) {
        if (q == y) return d;
        if (dist.emplace(q, static_cast<std::uint32_t>(d)).second) next.push_back(q);
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

PointSet penumbra(const Space& space, const PointSet& s, std::size_t r) {
  if (r == 0) return s;
  DistanceMap d = distances_from(space, s, r);
  std::vector<Point> out;
  out.reserve(d.size());
  for (const auto& [p, _] : d) out.push_back(p);
  return make_set(std::move(out));
}

PointSet r_boundary(const Space& space, const PointSet& s, std::size_t r) {
  if (r == 0 || s.empty()) return {};
  // Points outside S adjacent to S; every exit from S passes through one.
  std::vector<Point> outer;
  for (Point p : s) {
    for (Point q : space.neighbors(p)) {
      if (!contains(s, q)) outer.push_back(q);
    }
  }
  PointSet t = make_set(std::move(outer));
  PointSet outside = set_difference(penumbra(space, s, r), s);
  PointSet inside = set_intersection(penumbra(space, t, r), s);
  return set_union(outside, inside);
}

std::uint64_t lambda_bound(std::uint64_t K, std::uint64_t r) {
  if (K < 2) throw Error(Errc::invalid_argument, "lambda_bound requires K >= 2");
  if (K == 2) return 1 + 2 * r;
  // 1 + K((K-1)^r - 1)/(K-2), evaluated as 1 + K * sum_{i<r} (K-1)^i.
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t sum = 0, power = 1;
  for (std::uint64_t i = 0; i < r; ++i) {
    if (sum > kMax - power) throw Error(Errc::invalid_argument, "lambda_bound overflow");
    sum += power;
    if (i + 1 < r) {
      if (power > kMax / (K - 1)) throw Error(Errc::invalid_argument, "lambda_bound overflow");
      power *= (K - 1);
    }
  }
  if (sum > (kMax - 1) / K) throw Error(Errc::invalid_argument, "lambda_bound overflow");
  return 1 + K * sum;
}

Window::Window(const Space& space, Point center, std::size_t horizon)
    : space_(&space), center_(center), horizon_(horizon) {
  depth_.emplace(center, 0);
  std::vector<Point> frontier{center};
  std::vector<Point> all{center};
  std::size_t d = 1;
  for (; d <= horizon && !frontier.empty(); ++d) {
    std::vector<Point> next;
    for (Point p : frontier) {
      for (Point q : space.neighbors(p)) {
        if (depth_.emplace(q, static_cast<std::uint32_t>(d)).second) {
          next.push_back(q);
          all.push_back(q);
        }
      }
    }
    frontier = std::move(next);
  }
  points_ = make_set(std::move(all));
  if (frontier.empty()) {
    complete_ = true;
    return;
  }
  try {
    complete_ = true;
    for (Point p : frontier) {
      for (Point q : space.neighbors(p)) {
        if (!depth_.count(q)) {
          complete_ = false;
          return;
        }
      }
    }
  } catch (const Error& e) {
    if (e.code() != Errc::horizon_exceeded && e.code() != Errc::budget_exhausted) throw;
    complete_ = false;
  }
}

std::size_t Window::depth(Point p) const {
  auto it = depth_.find(p);
  if (it == depth_.end()) throw Error(Errc::invalid_argument, "point outside window");
  return it->second;
}

bool Window::in_core(Point p, std::size_t margin) const {
  auto it = depth_.find(p);
  if (it == depth_.end()) return false;
  if (complete_) return true;
  return it->second + margin <= horizon_;
}

PointSet Window::core(std::size_t margin) const {
  if (complete_) return points_;
  PointSet out;
  for (Point p : points_) {
    if (in_core(p, margin)) out.push_back(p);
  }
  return out;
}

PointSet r_boundary(const Window& window, const PointSet& s, std::size_t r) {
  for (Point p : s) {
    if (!window.in_core(p, r)) {
      throw Error(Errc::margin_too_small, "window margin below r around S",
                  {{"r", r}, {"horizon", window.horizon()}});
    }
  }
  return r_boundary(window.space(), s, r);
}
DistanceMap geodesic_region(const Window& w) {
  return distances_from(w.space(), PointSet{w.center()}, 2 * w.horizon());
}

std::vector<std::vector<std::uint32_t>> pairwise_distances(const Space& space,
                                                           const std::vector<Point>& sources,
                                                           const std::vector<Point>& targets,
                                                           std::size_t cap,
                                                           const DistanceMap* region) {
  std::unordered_map<Point, std::vector<std::size_t>, PointHash> where;
  for (std::size_t j = 0; j < targets.size(); ++j) where[targets[j]].push_back(j);
  std::vector<std::vector<std::uint32_t>> rows(sources.size(),
                                               std::vector<std::uint32_t>(targets.size(), kUnreached));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    std::vector<std::uint32_t>& row = rows[i];
    std::size_t remaining = where.size();
    DistanceMap seen;
    auto visit = [&](Point p, std::uint32_t d) {
      if (auto it = where.find(p); it != where.end()) {
        for (std::size_t j : it->second) row[j] = d;
        --remaining;
      }
    };
    seen.emplace(sources[i], 0);
    visit(sources[i], 0);
    std::vector<Point> frontier{sources[i]};
    for (std::size_t d = 1; d <= cap && remaining > 0 && !frontier.empty(); ++d) {
      std::vector<Point> next;
      for (Point p : frontier) {
        for (Point q : space.neighbors(p)) {
          if (region && !region->count(q)) continue;
          if (seen.emplace(q, static_cast<std::uint32_t>(d)).second) {
            next.push_back(q);
            visit(q, static_cast<std::uint32_t>(d));
          }
        }
      }
      frontier = std::move(next);
    }
  }
  return rows;
}

std::unordered_map<Point, NearestSource, PointHash> nearest_sources(const Space& space,
                                                                    const std::vector<Point>& sources,
                                                                    const PointSet& targets,
                                                                    std::size_t cap,
                                                                    const DistanceMap* region) {
  std::unordered_map<Point, NearestSource, PointHash> label;
  std::vector<Point> frontier;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto [it, fresh] = label.emplace(sources[i], NearestSource{0, static_cast<std::uint32_t>(i)});
    if (fresh) frontier.push_back(sources[i]);
  }
  std::size_t remaining = 0;
  for (Point t : targets) {
    if (!label.count(t)) ++remaining;
  }
  for (std::uint32_t d = 1; d <= cap && remaining > 0 && !frontier.empty(); ++d) {
    std::unordered_map<Point, std::uint32_t, PointHash> best;
    for (Point p : frontier) {
      std::uint32_t src = label[p].source;
      for (Point q : space.neighbors(p)) {
        if (label.count(q) || (region && !region->count(q))) continue;
        auto [it, fresh] = best.emplace(q, src);
        if (!fresh && src < it->second) it->second = src;
      }
    }
    std::vector<Point> next;
    next.reserve(best.size());
    for (const auto& [q, src] : best) {
      label.emplace(q, NearestSource{d, src});
      next.push_back(q);
      if (std::binary_search(targets.begin(), targets.end(), q)) --remaining;
    }
    frontier = std::move(next);
  }
  std::unordered_map<Point, NearestSource, PointHash> out;
  for (Point t : targets) {
    auto it = label.find(t);
    out.emplace(t, it == label.end() ? NearestSource{} : it->second);
  }
  return out;
}

DenseRegion::DenseRegion(const Window& window, std::size_t halo) : halo_(halo) {
  const Space& space = window.space();
  const std::size_t reach = window.complete() ? window.horizon() : window.horizon() + halo;
  std::vector<std::vector<std::uint32_t>> adj;
  points_.push_back(window.center());
  index_.emplace(window.center(), 0);
  depth_.push_back(0);
  for (std::size_t head = 0; head < points_.size(); ++head) {
    adj.emplace_back();
    const bool outer = depth_[head] >= reach;
    for (Point q : space.neighbors(points_[head])) {
      if (outer) {
        auto it = index_.find(q);
        if (it != index_.end()) adj[head].push_back(it->second);
        continue;
      }
      auto [it, fresh] = index_.emplace(q, static_cast<std::uint32_t>(points_.size()));
      if (fresh) {
        points_.push_back(q);
        depth_.push_back(depth_[head] + 1);
      }
      adj[head].push_back(it->second);
    }
  }
  offsets_.push_back(0);
  for (const auto& row : adj) {
    adj_.insert(adj_.end(), row.begin(), row.end());
    offsets_.push_back(static_cast<std::uint32_t>(adj_.size()));
  }
  for (Point p : points_) inside_.push_back(window.contains(p));
  stamp_.assign(points_.size(), 0);
  dist_.assign(points_.size(), 0);
}

std::optional<std::uint32_t> DenseRegion::index(Point p) const {
  auto it = index_.find(p);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void DenseRegion::bfs(const std::vector<std::uint32_t>& sources, std::size_t cap,
                      const std::function<bool(std::uint32_t, std::uint32_t)>& visit) const {
  if (++round_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    round_ = 1;
  }
  queue_.clear();
  for (std::uint32_t s : sources) {
    if (stamp_[s] == round_) continue;
    stamp_[s] = round_;
    dist_[s] = 0;
    queue_.push_back(s);
  }
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    std::uint32_t u = queue_[head];
    if (!visit(u, dist_[u])) return;
    if (dist_[u] >= cap) continue;
    for (std::uint32_t k = offsets_[u]; k < offsets_[u + 1]; ++k) {
      std::uint32_t v = adj_[k];
      if (stamp_[v] == round_) continue;
      stamp_[v] = round_;
      dist_[v] = dist_[u] + 1;
      queue_.push_back(v);
    }
  }
}

}  // namespace coarse
