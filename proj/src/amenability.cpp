#include "coarse/amenability.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "coarse/error.hpp"
#include "coarse/serialize.hpp"

namespace coarse {

namespace {

Rational ratio_of(std::size_t boundary, std::size_t size) {
  return Rational(static_cast<std::int64_t>(boundary), static_cast<std::int64_t>(size));
}

void require_nonempty(const PointSet& s) {
  if (s.empty()) throw Error(Errc::empty_set, "isoperimetric ratio of the empty set");
}

// |∂_1 S| for a small finite set, by scanning neighbours.
std::size_t unit_boundary(const Space& space, const PointSet& s) {
  std::unordered_set<Point, PointHash> outer;
  std::size_t inner = 0;
  for (Point p : s) {
    bool touches = false;
    for (Point q : space.neighbors(p)) {
      if (!contains(s, q)) {
        touches = true;
        outer.insert(q);
      }
    }
    inner += touches;
  }
  return inner + outer.size();
}

std::vector<Rational> ratio_row(const Window& w, const PointSet& s, const std::vector<std::size_t>& radii) {
  std::vector<Rational> row;
  for (std::size_t r : radii) row.push_back(iso_ratio(w, s, r));
  return row;
}

bool fits_margin(const Window& w, const PointSet& s, std::size_t margin) {
  if (w.complete()) return true;
  return std::all_of(s.begin(), s.end(), [&](Point p) { return w.in_core(p, margin); });
}

PointSet shave(const Window& w, PointSet s, const PointSet& keep) {
  const std::size_t max_steps = 16;
  Rational current = iso_ratio(w, s, 1);
  for (std::size_t step = 0; step < max_steps && s.size() > 1; ++step) {
    PointSet inner = set_intersection(r_boundary(w, s, 1), s);
    std::vector<Point> candidates;
    for (Point p : inner)
      if (!contains(keep, p)) candidates.push_back(p);
    canonical_sort(w.space(), candidates);
    std::optional<Point> best;
    Rational best_ratio = current;
    for (Point p : candidates) {
      Rational q = iso_ratio(w, set_difference(s, PointSet{p}), 1);
      if (q < best_ratio) {
        best_ratio = q;
        best = p;
      }
    }
    if (!best) break;
    s = set_difference(s, PointSet{*best});
    current = best_ratio;
  }
  return s;
}

struct Enumerator {
  const Space& space;
  std::size_t max_size, max_sets;
  IsoInfimum result;
  std::vector<Key> best_keys;
  std::vector<Point> current;
  std::unordered_set<Point, PointHash> in_set, excluded;
  bool stopped = false;

  void consider() {
    ++result.searched;
    PointSet s = make_set(current);
    Rational q = ratio_of(unit_boundary(space, s), s.size());
    bool better = result.best.empty() || q < result.ratio;
    std::vector<Key> keys;
    if (!better && q == result.ratio && s.size() <= result.best.size()) {
      keys = canonical_keys(space, s);
      better = s.size() < result.best.size() || keys < best_keys;
    }
    if (!better) return;
    best_keys = keys.empty() ? canonical_keys(space, s) : std::move(keys);
    result.best = std::move(s);
    result.ratio = q;
  }

  // Each connected set containing the seed is produced exactly once: a vertex popped from the
  // extension list is excluded from all later siblings.
  void extend(std::vector<Point> ext) {
    if (result.searched >= max_sets) {
      stopped = true;
      return;
    }
    consider();
    if (current.size() >= max_size) return;
    std::vector<Point> popped;
    while (!ext.empty() && !stopped) {
      Point v = ext.back();
      ext.pop_back();
      std::vector<Point> next = ext;
      std::vector<Point> fresh;
      for (Point u : space.neighbors(v)) {
        if (in_set.count(u) || excluded.count(u)) continue;
        if (std::find(next.begin(), next.end(), u) != next.end()) continue;
        fresh.push_back(u);
      }
      canonical_sort(space, fresh);
      std::reverse(fresh.begin(), fresh.end());
      next.insert(next.begin(), fresh.begin(), fresh.end());
      current.push_back(v);
      in_set.insert(v);
      extend(std::move(next));
      in_set.erase(v);
      current.pop_back();
      excluded.insert(v);
      popped.push_back(v);
    }
    for (Point v : popped) excluded.erase(v);
  }
};

}  // namespace

Rational iso_ratio(const Window& window, const PointSet& s, std::size_t r) {
  require_nonempty(s);
  return ratio_of(r_boundary(window, s, r).size(), s.size());
}

Rational iso_ratio(const Space& space, const PointSet& s, std::size_t r) {
  require_nonempty(s);
  return ratio_of(r_boundary(space, s, r).size(), s.size());
}

FolnerCertificate folner_search(const Window& window, const FolnerBudget& budget,
                                FolnerStrategy strategy, const std::vector<std::size_t>& radii) {
  if (radii.empty()) throw Error(Errc::invalid_argument, "no radii given");
  const std::size_t r_max = *std::max_element(radii.begin(), radii.end());
  FolnerCertificate cert;
  cert.radii = radii;
  const Space& space = window.space();
  for (std::size_t n = 1; n <= budget.max_n; ++n) {
    if (!window.complete() && n + r_max > window.horizon()) {
      cert.budget_exhausted = true;
      cert.stop_reason = "margin";
      break;
    }
    PointSet s = ball(space, window.center(), n);
    if (s.size() > budget.max_size) {
      cert.budget_exhausted = true;
      cert.stop_reason = "max-size";
      break;
    }
    const PointSet* prev = cert.sets.empty() ? nullptr : &cert.sets.back();
    if (prev) s = set_union(s, *prev);
    if (strategy == FolnerStrategy::shaved) s = shave(window, s, prev ? *prev : PointSet{window.center()});
    cert.ratios.push_back(ratio_row(window, s, radii));
    cert.sets.push_back(std::move(s));
  }
  const std::size_t m = cert.ratios.size();
  if (m >= 2) {
    Rational early = cert.ratios[0][0], late = cert.ratios[m / 2][0];
    for (std::size_t i = 0; i < m / 2; ++i) early = std::max(early, cert.ratios[i][0]);
    for (std::size_t i = m / 2; i < m; ++i) late = std::min(late, cert.ratios[i][0]);
    cert.non_vanishing = late > 0 && late * 2 >= early;
  }
  return cert;
}

Schedule harmonic_schedule(const Rational& a) {
  return [a](std::size_t n) { return a / static_cast<std::int64_t>(n); };
}

Schedule parse_schedule(const std::string& text) {
  const std::string suffix = "/n";
  if (text.size() <= suffix.size() || text.compare(text.size() - suffix.size(), suffix.size(), suffix) != 0)
    throw Error(Errc::parse_error, "schedule must have the form a/n: '" + text + "'");
  std::string a = text.substr(0, text.size() - suffix.size());
  if (a.size() >= 2 && a.front() == '(' && a.back() == ')') a = a.substr(1, a.size() - 2);
  Rational q = parse_rational(a);
  if (q <= 0) throw Error(Errc::parse_error, "schedule numerator must be positive");
  return harmonic_schedule(q);
}

FolnerReport verify_folner(const Window& window, const FolnerCertificate& cert,
                           const std::vector<std::size_t>& radii, const Schedule& schedule) {
  FolnerReport rep;
  const Space& space = window.space();
  const auto K = space.degree_bound();
  for (std::size_t i = 0; i < cert.sets.size(); ++i) {
    const PointSet& s = cert.sets[i];
    const std::size_t n = i + 1;
    if (i > 0 && !is_subset(cert.sets[i - 1], s)) rep.nested = false;
    const Rational eps = schedule(n);
    std::size_t unit = 0;
    bool have_unit = false;
    for (std::size_t r : radii) {
      require_nonempty(s);
      std::size_t b = r_boundary(window, s, r).size();
      Rational q = ratio_of(b, s.size());
      ++rep.checked;
      auto pos = std::find(cert.radii.begin(), cert.radii.end(), r);
      if (pos != cert.radii.end()) {
        std::size_t col = static_cast<std::size_t>(pos - cert.radii.begin());
        if (i >= cert.ratios.size() || col >= cert.ratios[i].size() || cert.ratios[i][col] != q)
          rep.ratios_match = false;
      }
      if (K && *K >= 2 && r >= 1) {
        if (!have_unit) {
          unit = r == 1 ? b : r_boundary(window, s, 1).size();
          have_unit = true;
        }
        if (b > lambda_bound(*K, r - 1) * unit) rep.lambda_ok = false;
      }
      if (q > eps && !rep.violation) rep.violation = FolnerViolation{n, r, q, eps};
    }
  }
  rep.accepted = rep.nested && rep.ratios_match && rep.lambda_ok && !rep.violation;
  return rep;
}

IsoInfimum iso_infimum(const Space& space, Point x, std::size_t max_size, std::size_t max_sets) {
  if (max_size == 0) throw Error(Errc::invalid_argument, "max_size must be positive");
  Enumerator e{space, max_size, max_sets, {}, {}, {}, {}, {}};
  e.current.push_back(x);
  e.in_set.insert(x);
  std::vector<Point> ext = space.neighbors(x);
  canonical_sort(space, ext);
  std::reverse(ext.begin(), ext.end());
  e.extend(std::move(ext));
  e.result.exhaustive = !e.stopped;
  return e.result;
}

PointSet lattice_boundary(const Window& window, const PointSet& gamma, const PointSet& s, std::size_t r) {
  if (!fits_margin(window, s, 2 * r))
    throw Error(Errc::margin_too_small, "set too close to the window rim for a lattice boundary",
                {{"radius", r}});
  const Space& space = window.space();
  DistanceMap near = distances_from(space, s, r);
  std::vector<Point> out;
  for (const auto& [x, d] : near) {
    if (!contains(gamma, x)) continue;
    DistanceMap around = distances_from(space, PointSet{x}, r);
    bool outside = std::any_of(around.begin(), around.end(),
                               [&](const auto& e) { return contains(gamma, e.first) && !contains(s, e.first); });
    if (outside) out.push_back(x);
  }
  return make_set(std::move(out));
}

RoughTransferReport rough_transfer(const std::unordered_map<Point, Point, PointHash>& phi,
                                   const Window& source, const Window& target, const PointSet& gamma,
                                   const std::vector<std::uint32_t>& s, std::uint64_t q_c,
                                   const PointSet& set, const std::vector<std::size_t>& radii) {
  require_nonempty(set);
  if (!is_subset(set, gamma)) throw Error(Errc::invalid_argument, "set must lie in the lattice");
  std::vector<Point> image_gamma, image_set;
  for (Point p : gamma) {
    auto it = phi.find(p);
    if (it == phi.end()) throw Error(Errc::invalid_argument, "map undefined on a lattice point");
    image_gamma.push_back(it->second);
    if (contains(set, p)) image_set.push_back(it->second);
  }
  PointSet gamma_p = make_set(std::move(image_gamma)), set_p = make_set(std::move(image_set));
  RoughTransferReport rep;
  for (std::size_t r : radii) {
    if (r >= s.size()) throw Error(Errc::insufficient_range, "expansiveness profile too short", {{"radius", r}});
    RoughTransferRow row;
    row.r = r;
    row.lhs = ratio_of(lattice_boundary(target, gamma_p, set_p, r).size(), set_p.size());
    row.rhs = Rational(static_cast<std::int64_t>(q_c)) *
              ratio_of(lattice_boundary(source, gamma, set, s[r]).size(), set.size());
    if (row.lhs > row.rhs) rep.ok = false;
    rep.rows.push_back(row);
  }
  return rep;
}

nlohmann::json to_json(const Space& space, const FolnerCertificate& cert) {
  nlohmann::json sets = nlohmann::json::array(), ratios = nlohmann::json::array();
  for (std::size_t i = 0; i < cert.sets.size(); ++i) {
    sets.push_back(set_to_json(space, cert.sets[i]));
    for (std::size_t j = 0; j < cert.radii.size() && i < cert.ratios.size(); ++j) {
      const Rational& q = cert.ratios[i][j];
      ratios.push_back({i + 1, cert.radii[j], q.numerator(), q.denominator()});
    }
  }
  return {{"sets", sets},
          {"ratios", ratios},
          {"radii", cert.radii},
          {"budget_exhausted", cert.budget_exhausted},
          {"stop_reason", cert.stop_reason},
          {"non_vanishing", cert.non_vanishing}};
}

FolnerCertificate certificate_from_json(const Space& space, const nlohmann::json& j) {
  try {
    FolnerCertificate cert;
    for (const auto& s : j.at("sets")) cert.sets.push_back(set_from_json(space, s));
    std::vector<std::array<std::int64_t, 4>> rows;
    for (const auto& row : j.at("ratios")) {
      if (!row.is_array() || row.size() != 4) throw Error(Errc::parse_error, "ratio rows are [n,r,num,den]");
      rows.push_back({row[0].get<std::int64_t>(), row[1].get<std::int64_t>(), row[2].get<std::int64_t>(),
                      row[3].get<std::int64_t>()});
    }
    for (const auto& row : rows) {
      std::size_t r = static_cast<std::size_t>(row[1]);
      if (std::find(cert.radii.begin(), cert.radii.end(), r) == cert.radii.end()) cert.radii.push_back(r);
    }
    cert.ratios.assign(cert.sets.size(), std::vector<Rational>(cert.radii.size(), Rational(-1)));
    for (const auto& row : rows) {
      if (row[0] < 1 || static_cast<std::size_t>(row[0]) > cert.sets.size() || row[3] == 0)
        throw Error(Errc::parse_error, "ratio row out of range");
      std::size_t col = static_cast<std::size_t>(
          std::find(cert.radii.begin(), cert.radii.end(), static_cast<std::size_t>(row[1])) - cert.radii.begin());
      cert.ratios[static_cast<std::size_t>(row[0] - 1)][col] = Rational(row[2], row[3]);
    }
    return cert;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("bad certificate: ") + e.what());
  }
}

nlohmann::json to_json(const FolnerReport& r) {
  nlohmann::json j = {{"accepted", r.accepted},
                      {"nested", r.nested},
                      {"ratios_match", r.ratios_match},
                      {"lambda_ok", r.lambda_ok},
                      {"checked", r.checked}};
  if (r.violation) {
    j["violation"] = {{"n", r.violation->n},
                      {"r", r.violation->r},
                      {"ratio", rational_to_json(r.violation->ratio)},
                      {"epsilon", rational_to_json(r.violation->epsilon)}};
  }
  return j;
}

nlohmann::json to_json(const Space& space, const IsoInfimum& r) {
  return {{"best", set_to_json(space, r.best)},
          {"ratio", rational_to_json(r.ratio)},
          {"exhaustive", r.exhaustive},
          {"searched", r.searched}};
}

}  // namespace coarse
