#include "coarse/asdim.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "coarse/error.hpp"
#include "coarse/serialize.hpp"

namespace coarse {

namespace {

constexpr std::uint32_t kNone = kUnreached;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<std::uint32_t> indices(const DenseRegion& region, const PointSet& s) {
  std::vector<std::uint32_t> out;
  for (Point p : s) out.push_back(*region.index(p));
  return out;
}

std::vector<Key> keys_of(const Space& space, std::initializer_list<Point> pts) {
  std::vector<Key> out;
  for (Point p : pts) out.push_back(space.key(p));
  return out;
}

// Members ordered by their least key, so output does not depend on point ids.
std::vector<PointSet> canonical_members(const Space& space, std::vector<PointSet> members) {
  std::vector<std::pair<Key, PointSet>> keyed;
  for (PointSet& m : members) {
    if (m.empty()) continue;
    Key least = space.key(m.front());
    for (Point p : m) least = std::min(least, space.key(p));
    keyed.emplace_back(std::move(least), std::move(m));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<PointSet> out;
  for (auto& [k, m] : keyed) out.push_back(std::move(m));
  return out;
}

ColoredCover checked(const Window& window, ColoredCover cover, const std::string& what) {
  CoverReport rep = verify_cover(window, cover);
  if (!rep.ok) {
    throw Error(Errc::construction_failed, what + " cover failed verification",
                {{"R", cover.R}, {"report", to_json(rep)}});
  }
  return cover;
}

ColoredCover annulus_cover(const Window& window, std::size_t R) {
  const Space& space = window.space();
  const std::size_t D = 3 * R;
  DenseRegion region(window, (D + 1) / 2);
  const std::size_t n = region.size();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto ring = [&](std::uint32_t i) { return region.depth(i) / R; };
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!region.in_window(i)) continue;
    region.bfs({i}, R, [&](std::uint32_t j, std::uint32_t) {
      if (region.in_window(j) && ring(j) == ring(i)) parent[find(j)] = find(i);
      return true;
    });
  }
  std::map<std::uint32_t, std::vector<Point>> pieces;
  for (std::uint32_t i = 0; i < n; ++i)
    if (region.in_window(i)) pieces[find(i)].push_back(region.point(i));
  std::vector<std::vector<PointSet>> families(2);
  for (auto& [root, pts] : pieces) families[ring(root) % 2].push_back(make_set(std::move(pts)));
  ColoredCover cover;
  cover.R = R;
  cover.D = D;
  for (auto& f : families) cover.families.push_back(canonical_members(space, std::move(f)));
  return cover;
}

ColoredCover brick_cover(const Window& window, std::size_t R) {
  const Space& space = window.space();
  const Key origin = space.key(window.center());
  if (space.kind() != SpaceKind::product || origin.size() != 2)
    throw Error(Errc::construction_failed, "bricks need a two-dimensional lattice");
  const std::int64_t side = 3 * static_cast<std::int64_t>(R), shift = static_cast<std::int64_t>(R);
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Point>> bricks;
  for (Point p : window.points()) {
    Key k = space.key(p);
    std::int64_t dx = k[0] - origin[0], dy = k[1] - origin[1];
    std::int64_t j = floor_div(dy, side);
    std::int64_t a = floor_div(dx - j * shift, side);
    bricks[{a, j}].push_back(p);
  }
  std::vector<std::vector<PointSet>> families(3);
  for (auto& [aj, pts] : bricks) {
    std::int64_t color = ((aj.first - aj.second) % 3 + 3) % 3;
    families[static_cast<std::size_t>(color)].push_back(make_set(std::move(pts)));
  }
  ColoredCover cover;
  cover.R = R;
  cover.D = static_cast<std::size_t>(2 * (side - 1));
  for (auto& f : families) cover.families.push_back(canonical_members(space, std::move(f)));
  return cover;
}

}  // namespace

CoverReport verify_cover(const Window& window, const ColoredCover& cover) {
  const Space& space = window.space();
  CoverReport rep;
  auto fail = [&](CoverViolation v) {
    rep.ok = false;
    rep.violation = std::move(v);
    return rep;
  };
  DenseRegion region(window, (std::max(cover.D, cover.R) + 1) / 2);
  const std::size_t n = region.size();

  std::vector<char> covered(n, 0);
  for (std::size_t f = 0; f < cover.families.size(); ++f) {
    for (std::size_t m = 0; m < cover.families[f].size(); ++m) {
      for (Point p : cover.families[f][m]) {
        auto i = region.index(p);
        if (!i || !region.in_window(*i))
          return fail({"outside-window", f, {m}, keys_of(space, {p}), std::nullopt});
        covered[*i] = 1;
      }
    }
  }
  std::vector<Point> missing;
  for (std::uint32_t i = 0; i < n; ++i)
    if (region.in_window(i) && !covered[i]) missing.push_back(region.point(i));
  if (!missing.empty()) {
    canonical_sort(space, missing);
    return fail({"uncovered", 0, {}, keys_of(space, {missing.front()}), std::nullopt});
  }

  std::vector<std::uint32_t> mark(n, kNone);
  std::uint32_t stamp = 0;
  for (std::size_t f = 0; f < cover.families.size(); ++f) {
    for (std::size_t m = 0; m < cover.families[f].size(); ++m) {
      const PointSet& member = cover.families[f][m];
      ++rep.members_checked;
      if (member.size() < 2) continue;
      std::vector<std::uint32_t> idx = indices(region, member);
      for (std::uint32_t i : idx) {
        ++stamp;
        for (std::uint32_t j : idx) mark[j] = stamp;
        std::size_t found = 0;
        region.bfs({i}, cover.D, [&](std::uint32_t j, std::uint32_t) {
          if (mark[j] == stamp) ++found;
          return found < idx.size();
        });
        if (found < idx.size()) {
          std::uint32_t far = kNone;
          std::vector<char> seen(n, 0);
          region.bfs({i}, cover.D, [&](std::uint32_t j, std::uint32_t) {
            seen[j] = 1;
            return true;
          });
          for (std::uint32_t j : idx)
            if (!seen[j] && (far == kNone || space.key(region.point(j)) < space.key(region.point(far)))) far = j;
          return fail({"diameter", f, {m}, keys_of(space, {region.point(i), region.point(far)}), std::nullopt});
        }
      }
    }
  }

  for (std::size_t f = 0; f < cover.families.size(); ++f) {
    std::vector<std::uint32_t> owner(n, kNone);
    const auto& family = cover.families[f];
    for (std::size_t m = 0; m < family.size(); ++m) {
      for (std::uint32_t i : indices(region, family[m])) {
        if (owner[i] != kNone)
          return fail({"separation", f, {owner[i], m}, keys_of(space, {region.point(i)}), 0});
        owner[i] = static_cast<std::uint32_t>(m);
      }
    }
    for (std::size_t m = 0; m < family.size(); ++m) {
      std::optional<CoverViolation> bad;
      region.bfs(indices(region, family[m]), cover.R, [&](std::uint32_t j, std::uint32_t d) {
        if (owner[j] == kNone || owner[j] == m) return true;
        bad = CoverViolation{"separation", f, {m, owner[j]}, keys_of(space, {region.point(j)}), d};
        return false;
      });
      if (bad) return fail(std::move(*bad));
    }
  }
  return rep;
}

std::string to_string(CoverStrategy s) { return s == CoverStrategy::annulus ? "annulus" : "bricks"; }

ColoredCover slab_cover(const Window& window, std::size_t R, CoverStrategy strategy) {
  if (R == 0) throw Error(Errc::invalid_argument, "R must be positive");
  if (strategy == CoverStrategy::annulus) return checked(window, annulus_cover(window, R), "annulus");
  return checked(window, brick_cover(window, R), "brick");
}

std::vector<AsdimEntry> asdim_profile(const Window& window, const std::vector<std::size_t>& radii) {
  std::vector<AsdimEntry> out;
  for (std::size_t R : radii) {
    AsdimEntry e;
    e.R = R;
    if (window.complete()) {
      DenseRegion region(window, 0);
      std::size_t diam = 0;
      for (std::uint32_t i = 0; i < region.size(); ++i)
        region.bfs({i}, region.size(), [&](std::uint32_t, std::uint32_t d) {
          diam = std::max<std::size_t>(diam, d);
          return true;
        });
      ColoredCover whole;
      whole.R = R;
      whole.D = diam;
      whole.families = {{window.points()}};
      e.n = 0;
      e.cover = checked(window, std::move(whole), "single-set");
      e.method = "whole";
      out.push_back(std::move(e));
      continue;
    }
    for (CoverStrategy s : {CoverStrategy::annulus, CoverStrategy::bricks}) {
      try {
        e.cover = slab_cover(window, R, s);
        e.n = s == CoverStrategy::annulus ? 1 : 2;
        e.method = to_string(s);
        break;
      } catch (const Error& err) {
        if (err.code() != Errc::construction_failed) throw;
      }
    }
    if (!e.n) e.method = "construction-failed";
    out.push_back(std::move(e));
  }
  return out;
}

ColoredCover push_cover(const ColoredCover& cover, const PartialBijection& f, const Distortion& d,
                        const Window& target) {
  const Space& space = target.space();
  const Rational C = d.C, K = d.K;
  const Rational inflated = C * static_cast<std::int64_t>(cover.D) + 2 * C * K;
  const Rational deflated = Rational(static_cast<std::int64_t>(cover.R)) / C - 2 * K;
  if (deflated < 1)
    throw Error(Errc::construction_failed, "separation does not survive the distortion",
                {{"R", cover.R}, {"deflated", to_string(deflated)}});

  std::unordered_map<Point, std::vector<std::pair<std::size_t, std::size_t>>, PointHash> member_of;
  for (std::size_t i = 0; i < cover.families.size(); ++i)
    for (std::size_t m = 0; m < cover.families[i].size(); ++m)
      for (Point p : cover.families[i][m]) member_of[p].emplace_back(i, m);

  std::vector<Point> images;
  std::unordered_map<Point, Point, PointHash> preimage;
  for (const auto& [x, y] : f.pairs()) {
    if (!member_of.count(x)) continue;
    images.push_back(y);
    preimage[y] = x;
  }
  canonical_sort(space, images);
  const std::size_t reach = static_cast<std::size_t>(floor_of(K));
  auto nearest = nearest_sources(space, images, target.points(), reach);

  std::vector<std::vector<std::vector<Point>>> parts(cover.families.size());
  for (std::size_t i = 0; i < cover.families.size(); ++i) parts[i].resize(cover.families[i].size());
  std::vector<Point> order(target.points().begin(), target.points().end());
  canonical_sort(space, order);
  for (Point y : order) {
    auto it = nearest.find(y);
    if (it == nearest.end() || it->second.distance == kUnreached)
      throw Error(Errc::not_a_net, "target point farther than K from the pushed cover",
                  {{"point", key_to_json(space.key(y))}});
    Point x = preimage.at(images[it->second.source]);
    for (auto [i, m] : member_of.at(x)) parts[i][m].push_back(y);
  }
  ColoredCover out;
  out.D = static_cast<std::size_t>(ceil_of(inflated));
  out.R = static_cast<std::size_t>(floor_of(deflated));
  for (auto& fam : parts) {
    std::vector<PointSet> members;
    for (auto& m : fam) members.push_back(make_set(std::move(m)));
    out.families.push_back(canonical_members(space, std::move(members)));
  }
  return out;
}

nlohmann::json to_json(const Space& space, const ColoredCover& cover) {
  nlohmann::json families = nlohmann::json::array();
  for (const auto& f : cover.families) {
    nlohmann::json members = nlohmann::json::array();
    for (const PointSet& m : f) members.push_back(set_to_json(space, m));
    families.push_back(members);
  }
  return {{"R", cover.R}, {"D", cover.D}, {"families", families}};
}

ColoredCover cover_from_json(const Space& space, const nlohmann::json& j) {
  try {
    ColoredCover cover;
    cover.R = j.at("R").get<std::size_t>();
    cover.D = j.at("D").get<std::size_t>();
    for (const auto& f : j.at("families")) {
      std::vector<PointSet> members;
      for (const auto& m : f) members.push_back(set_from_json(space, m));
      cover.families.push_back(std::move(members));
    }
    return cover;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("bad cover: ") + e.what());
  }
}

nlohmann::json to_json(const CoverReport& r) {
  nlohmann::json j = {{"ok", r.ok}, {"members_checked", r.members_checked}};
  if (r.violation) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Key& k : r.violation->points) pts.push_back(key_to_json(k));
    j["violation"] = {{"kind", r.violation->kind},
                      {"family", r.violation->family},
                      {"members", r.violation->members},
                      {"points", pts}};
    if (r.violation->distance) j["violation"]["distance"] = *r.violation->distance;
  }
  return j;
}

}  // namespace coarse
