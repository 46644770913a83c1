#include "coarse/ends.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "coarse/error.hpp"
#include "coarse/serialize.hpp"

namespace coarse {

namespace {

// Window points with exact μ-steps (space distance <= μ) as CSR.
struct LocalGraph {
  std::vector<Point> points;  // dense index -> point
  std::unordered_map<Point, std::uint32_t, PointHash> index;
  std::vector<std::uint32_t> depth;
  std::vector<char> inside;
  std::vector<Key> keys;
  std::vector<std::uint32_t> offsets, steps;
};

LocalGraph local_graph(const Window& window, std::size_t mu) {
  const Space& space = window.space();
  DenseRegion region(window, mu / 2);
  LocalGraph g;
  for (std::uint32_t i = 0; i < region.size(); ++i) {
    Point p = region.point(i);
    g.points.push_back(p);
    g.index.emplace(p, i);
    g.depth.push_back(region.depth(i));
    g.inside.push_back(region.in_window(i));
    g.keys.push_back(g.inside.back() ? space.key(p) : Key{});
  }
  g.offsets.push_back(0);
  for (std::uint32_t u = 0; u < region.size(); ++u) {
    if (g.inside[u]) {
      region.bfs({u}, mu, [&](std::uint32_t v, std::uint32_t) {
        if (v != u && g.inside[v]) g.steps.push_back(v);
        return true;
      });
    }
    g.offsets.push_back(static_cast<std::uint32_t>(g.steps.size()));
  }
  return g;
}

std::vector<Component> flood(const Window& window, const LocalGraph& g, const PointSet& removed,
                             std::size_t mu) {
  const std::uint32_t none = kUnreached;
  std::vector<std::uint32_t> label(g.points.size(), none);
  std::vector<char> gone(g.points.size(), 0);
  for (Point p : removed) {
    auto it = g.index.find(p);
    if (it != g.index.end()) gone[it->second] = 1;
  }
  std::vector<std::vector<Point>> parts;
  std::vector<std::uint32_t> least;
  std::vector<char> escaping;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t start = 0; start < g.points.size(); ++start) {
    if (gone[start] || label[start] != none || !g.inside[start]) continue;
    std::uint32_t id = static_cast<std::uint32_t>(parts.size());
    parts.emplace_back();
    escaping.push_back(0);
    least.push_back(start);
    stack.assign(1, start);
    label[start] = id;
    while (!stack.empty()) {
      std::uint32_t u = stack.back();
      stack.pop_back();
      parts[id].push_back(g.points[u]);
      if (g.keys[u] < g.keys[least[id]]) least[id] = u;
      if (!window.complete() && g.depth[u] + mu > window.horizon()) escaping[id] = 1;
      for (std::uint32_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
        std::uint32_t v = g.steps[k];
        if (label[v] != none || gone[v]) continue;
        label[v] = id;
        stack.push_back(v);
      }
    }
  }
  std::vector<Component> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    Component c;
    c.points = make_set(std::move(parts[i]));
    c.escaping = escaping[i];
    out.push_back(std::move(c));
  }
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g.keys[least[a]] < g.keys[least[b]]; });
  std::vector<Component> sorted;
  for (std::size_t i : order) sorted.push_back(std::move(out[i]));
  return sorted;
}

void check_removed(const Window& window, const PointSet& removed, std::size_t mu) {
  if (window.complete()) return;
  for (Point p : removed) {
    if (!window.in_core(p, mu))
      throw Error(Errc::margin_too_small, "removed set must lie in the mu-core of the window", {{"mu", mu}});
  }
}

std::size_t ceil_half(std::size_t n) { return (n + 1) / 2; }

}  // namespace

std::size_t ComponentForest::escaping_count(std::size_t n) const {
  const auto& level = levels.at(n - 1);
  return static_cast<std::size_t>(std::count_if(level.begin(), level.end(), [](const Component& c) { return c.escaping; }));
}

std::vector<Component> mu_components(const Window& window, const PointSet& removed, std::size_t mu) {
  if (mu == 0) throw Error(Errc::invalid_argument, "mu must be positive");
  check_removed(window, removed, mu);
  return flood(window, local_graph(window, mu), removed, mu);
}

ComponentForest end_tree(const Window& window, std::size_t mu, std::size_t depth, std::size_t radius_offset) {
  if (mu == 0) throw Error(Errc::invalid_argument, "mu must be positive");
  if (!window.complete() && window.horizon() < depth + radius_offset + 3 * mu)
    throw Error(Errc::margin_too_small, "window horizon below depth + offset + 3 mu",
                {{"horizon", window.horizon()}, {"depth", depth}, {"mu", mu}, {"offset", radius_offset}});
  ComponentForest forest;
  const Space& space = window.space();
  forest.basepoint = space.key(window.center());
  forest.mu = mu;
  forest.horizon = window.horizon();
  forest.complete = window.complete();
  forest.radius_offset = radius_offset;
  LocalGraph g = local_graph(window, mu);
  for (std::size_t n = 1; n <= depth; ++n) {
    PointSet removed = open_ball(space, window.center(), forest.removed_radius(n));
    std::vector<Component> level = flood(window, g, removed, mu);
    if (n > 1) {
      const auto& prev = forest.levels.back();
      std::uint32_t top = 0;
      for (const Component& c : prev) top = std::max(top, c.points.back().id + 1);
      std::vector<std::uint32_t> owner(top, kUnreached);
      for (std::size_t i = 0; i < prev.size(); ++i)
        for (Point p : prev[i].points) owner[p.id] = static_cast<std::uint32_t>(i);
      for (Component& c : level) c.parent = owner.at(c.points.front().id);
    }
    forest.levels.push_back(std::move(level));
  }
  return forest;
}

std::string to_string(const EndClass& c) {
  switch (c.kind) {
    case EndKind::zero: return "0";
    case EndKind::one: return "1";
    case EndKind::two: return "2";
    case EndKind::finite: return "finite(" + std::to_string(c.count) + ")";
    case EndKind::cantor_like: return "cantor-like";
    case EndKind::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

EndClass end_classification(const ComponentForest& forest) {
  const std::size_t depth = forest.depth();
  EndClass out;
  if (depth < 4) return out;
  std::vector<std::size_t> counts;
  for (std::size_t n = 1; n <= depth; ++n) counts.push_back(forest.escaping_count(n));

  const std::size_t half = depth / 2;
  bool stable = std::all_of(counts.begin() + half, counts.end(), [&](std::size_t c) { return c == counts.back(); });
  if (stable) {
    out.count = counts.back();
    out.kind = out.count == 0 ? EndKind::zero
               : out.count == 1 ? EndKind::one
               : out.count == 2 ? EndKind::two
                                : EndKind::finite;
    return out;
  }

  bool increasing = true;
  for (std::size_t i = 1; i < depth; ++i) increasing = increasing && counts[i] > counts[i - 1];
  if (!increasing) return out;
  // Every escaping component at level n must have two escaping descendants by level n + half.
  for (std::size_t n = 1; n + half <= depth; ++n) {
    const auto& level = forest.levels[n - 1];
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (!level[i].escaping) continue;
      std::vector<std::size_t> line{i};
      bool split = false;
      for (std::size_t m = n + 1; m <= n + half && !split; ++m) {
        std::vector<std::size_t> next;
        for (std::size_t j = 0; j < forest.levels[m - 1].size(); ++j) {
          const Component& c = forest.levels[m - 1][j];
          if (c.escaping && c.parent && std::find(line.begin(), line.end(), *c.parent) != line.end())
            next.push_back(j);
        }
        split = next.size() >= 2;
        line = std::move(next);
      }
      if (!split) return out;
    }
  }
  out.kind = EndKind::cantor_like;
  return out;
}

LevelMap containment_map(const ComponentForest& from, const ComponentForest& to) {
  if (from.basepoint != to.basepoint || from.horizon != to.horizon || from.depth() != to.depth())
    throw Error(Errc::mismatched_parameters, "forests differ in basepoint, horizon or depth");
  if (from.radius_offset < to.radius_offset)
    throw Error(Errc::mismatched_parameters, "source forest removes smaller balls than the target");
  LevelMap map;
  for (std::size_t n = 1; n <= from.depth(); ++n) {
    const auto& src = from.levels[n - 1];
    const auto& dst = to.levels[n - 1];
    std::uint32_t top = 0;
    for (const Component& c : dst) top = std::max(top, c.points.back().id + 1);
    for (const Component& c : src) top = std::max(top, c.points.back().id + 1);
    std::vector<std::uint32_t> owner(top, kUnreached);
    for (std::size_t j = 0; j < dst.size(); ++j)
      for (Point p : dst[j].points) owner[p.id] = static_cast<std::uint32_t>(j);
    std::vector<std::optional<std::size_t>> row;
    for (const Component& c : src) {
      std::optional<std::size_t> target;
      bool ok = true;
      for (Point p : c.points) {
        std::uint32_t j = owner[p.id];
        if (j == kUnreached || (target && *target != j)) {
          ok = false;
          break;
        }
        target = j;
      }
      row.push_back(ok ? target : std::nullopt);
    }
    map.push_back(std::move(row));
  }
  return map;
}

LevelMap theta_map(const ComponentForest& mu_forest, const ComponentForest& nu_forest) {
  if (mu_forest.mu > nu_forest.mu) throw Error(Errc::mismatched_parameters, "theta needs mu <= nu");
  if (mu_forest.radius_offset != nu_forest.radius_offset)
    throw Error(Errc::mismatched_parameters, "theta needs the same removed balls");
  return containment_map(mu_forest, nu_forest);
}

LevelMap xi_map(const ComponentForest& n_forest, const ComponentForest& one_forest) {
  if (one_forest.mu != 1) throw Error(Errc::mismatched_parameters, "xi targets the 1-forest");
  if (n_forest.radius_offset != one_forest.radius_offset + ceil_half(n_forest.mu - 1))
    throw Error(Errc::mismatched_parameters, "xi needs the source balls enlarged by ceil((N-1)/2)",
                {{"expected_offset", one_forest.radius_offset + ceil_half(n_forest.mu - 1)}});
  return containment_map(n_forest, one_forest);
}

bool bijective_on_escaping(const LevelMap& map, const ComponentForest& from, const ComponentForest& to) {
  for (std::size_t n = 1; n <= from.depth(); ++n) {
    std::vector<std::size_t> hit;
    const auto& src = from.levels[n - 1];
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (!src[i].escaping) continue;
      const auto& t = map[n - 1][i];
      if (!t || !to.levels[n - 1][*t].escaping) return false;
      hit.push_back(*t);
    }
    std::sort(hit.begin(), hit.end());
    if (std::adjacent_find(hit.begin(), hit.end()) != hit.end()) return false;
    if (hit.size() != to.escaping_count(n)) return false;
  }
  return true;
}

nlohmann::json to_json(const Space& space, const ComponentForest& forest) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t n = 1; n <= forest.depth(); ++n) {
    nlohmann::json comps = nlohmann::json::array();
    const auto& level = forest.levels[n - 1];
    for (std::size_t i = 0; i < level.size(); ++i) {
      nlohmann::json c = {{"level", n},
                          {"id", i},
                          {"size", level[i].points.size()},
                          {"escaping", level[i].escaping},
                          {"least", key_to_json(space.key(level[i].points.front()))}};
      c["parent"] = level[i].parent ? nlohmann::json(*level[i].parent) : nlohmann::json(nullptr);
      comps.push_back(c);
    }
    levels.push_back(comps);
  }
  nlohmann::json counts = nlohmann::json::array();
  for (std::size_t n = 1; n <= forest.depth(); ++n) counts.push_back(forest.escaping_count(n));
  return {{"basepoint", key_to_json(forest.basepoint)},
          {"mu", forest.mu},
          {"horizon", forest.horizon},
          {"complete", forest.complete},
          {"radius_offset", forest.radius_offset},
          {"escaping_counts", counts},
          {"classification", to_string(end_classification(forest))},
          {"levels", levels}};
}

std::string to_dot(const ComponentForest& forest) {
  std::ostringstream out;
  out << "digraph ends {\n";
  for (std::size_t n = 1; n <= forest.depth(); ++n) {
    const auto& level = forest.levels[n - 1];
    for (std::size_t i = 0; i < level.size(); ++i) {
      out << "  c" << n << "_" << i << " [label=\"" << n << ":" << i << " (" << level[i].points.size() << ")\""
          << (level[i].escaping ? "" : ", style=dashed") << "];\n";
      if (level[i].parent) out << "  c" << n - 1 << "_" << *level[i].parent << " -> c" << n << "_" << i << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace coarse
