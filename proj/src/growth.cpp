#include "coarse/growth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coarse/error.hpp"
#include "coarse/serialize.hpp"

namespace coarse {

namespace {

GrowthSample count_layers(const Space& space, Point x, std::size_t r_max, const PointSet* gamma) {
  DistanceMap d = distances_from(space, PointSet{x}, r_max);
  GrowthSample s;
  s.basepoint = space.key(x);
  s.counts.assign(r_max + 1, 0);
  for (const auto& [p, r] : d) {
    if (!gamma || contains(*gamma, p)) ++s.counts[r];
  }
  for (std::size_t r = 1; r <= r_max; ++r) s.counts[r] += s.counts[r - 1];
  return s;
}

struct Fit {
  double slope = 0, max_secant = 0, min_secant = 0;
};

Fit fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  Fit f;
  f.slope = sxx > 0 ? sxy / sxx : 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    if (i == 0) {
      f.max_secant = f.min_secant = s;
    } else {
      f.max_secant = std::max(f.max_secant, s);
      f.min_secant = std::min(f.min_secant, s);
    }
  }
  return f;
}

std::size_t radius_of(const Rational& q) {
  if (q < 0) throw Error(Errc::invalid_argument, "negative radius");
  return static_cast<std::size_t>(floor_of(q));
}

// Largest radius r such that B̄(x,r) lies inside the window.
std::size_t room(const Window& w, Point x, std::size_t want) {
  if (w.complete()) return want;
  std::size_t depth = w.depth(x);
  return depth >= w.horizon() ? 0 : std::min(want, w.horizon() - depth);
}

}  // namespace

GrowthSample growth_function(const Space& space, Point x, std::size_t r_max) {
  return count_layers(space, x, r_max, nullptr);
}

GrowthSample lattice_growth(const Space& space, const PointSet& gamma, Point x, std::size_t r_max) {
  return count_layers(space, x, r_max, &gamma);
}

bool verify_domination(const GrowthSample& u, const GrowthSample& v, const DominationWitness& w) {
  if (w.a < 1 || w.b < 1 || w.c < 1) return false;
  for (std::size_t r = w.c; r <= u.r_max(); ++r) {
    if (w.b * r > v.r_max()) break;
    if (u.at(r) > w.a * v.at(w.b * r)) return false;
  }
  return true;
}

std::optional<DominationWitness> check_domination(const GrowthSample& u, const GrowthSample& v,
                                                  const DominationCaps& caps) {
  const std::size_t n = u.r_max();
  if (n < 1 || n > v.r_max()) {
    throw Error(Errc::insufficient_range, "dominating sample must reach the dominated sample's range",
                {{"u_r_max", n}, {"v_r_max", v.r_max()}});
  }
  const std::uint64_t c_limit = std::min<std::uint64_t>(caps.c_max, n - (n + 1) / 2 + 1);
  for (std::uint64_t b = 1; b <= caps.b_max && b * n <= v.r_max(); ++b) {
    for (std::uint64_t c = 1; c <= c_limit; ++c) {
      std::uint64_t a = 1;
      for (std::size_t r = c; r <= n; ++r) {
        std::uint64_t denom = v.at(b * r);
        a = std::max<std::uint64_t>(a, (u.at(r) + denom - 1) / denom);
      }
      if (a <= caps.a_max) return DominationWitness{a, b, c};
    }
  }
  return std::nullopt;
}

DominationWitness compose_domination(const DominationWitness& w1, const DominationWitness& w2) {
  return {w1.a * w2.a, w1.b * w2.b, std::max(w1.c, (w2.c + w1.b - 1) / w1.b)};
}

ExponentReport growth_exponents(const GrowthSample& sample, const Rational& tail_fraction) {
  const std::size_t n = sample.r_max();
  if (n < 8) throw Error(Errc::insufficient_range, "exponent estimates need r_max >= 8", {{"r_max", n}});
  if (tail_fraction <= 0 || tail_fraction > 1) throw Error(Errc::invalid_argument, "tail fraction must lie in (0,1]");
  ExponentReport e;
  std::size_t len = std::max<std::size_t>(2, static_cast<std::size_t>(floor_of(tail_fraction * static_cast<std::int64_t>(n))));
  e.tail_end = n;
  e.tail_begin = std::max<std::size_t>(1, n - len);
  std::vector<double> logr, r, logv;
  for (std::size_t k = e.tail_begin; k <= n; ++k) {
    logr.push_back(std::log(static_cast<double>(k)));
    r.push_back(static_cast<double>(k));
    logv.push_back(std::log(static_cast<double>(sample.at(k))));
  }
  Fit a = fit(logr, logv), b = fit(r, logv);
  e.loglog_fit = a.slope;
  e.loglog_limsup = a.max_secant;
  e.loglog_liminf = a.min_secant;
  e.exp_fit = b.slope;
  e.exp_limsup = b.max_secant;
  e.exp_liminf = b.min_secant;
  e.loglog_ratio = logv.back() / logr.back();
  e.exp_ratio = logv.back() / r.back();
  return e;
}

std::string to_string(GrowthLabel label) {
  switch (label) {
    case GrowthLabel::polynomial: return "polynomial";
    case GrowthLabel::exponential: return "exponential";
    case GrowthLabel::quasi_exponential: return "quasi-exponential";
    case GrowthLabel::quasi_polynomial: return "quasi-polynomial";
    case GrowthLabel::pseudo_quasi_polynomial: return "pseudo-quasi-polynomial";
    case GrowthLabel::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

GrowthClass classify_growth(const GrowthSample& sample, double tolerance, const Rational& tail_fraction) {
  GrowthClass out;
  out.exponents = growth_exponents(sample, tail_fraction);
  const ExponentReport& e = out.exponents;
  const double d = std::round(e.loglog_fit);
  if (e.loglog_limsup - e.loglog_liminf <= 2 * tolerance && std::abs(e.loglog_fit - d) <= tolerance) {
    out.label = GrowthLabel::polynomial;
    out.degree = static_cast<std::int64_t>(d);
  } else if (e.exp_liminf >= 3 * tolerance) {
    out.label = GrowthLabel::exponential;
  } else if (e.exp_limsup >= 3 * tolerance) {
    out.label = GrowthLabel::quasi_exponential;
  } else if (e.exp_limsup <= tolerance) {
    out.label = GrowthLabel::quasi_polynomial;
  } else if (e.exp_liminf <= tolerance) {
    out.label = GrowthLabel::pseudo_quasi_polynomial;
  }
  return out;
}

QuasiLatticeProfile quasi_lattice_profile(const Window& window, const PointSet& gamma, std::size_t r_max) {
  if (gamma.empty()) throw Error(Errc::empty_set, "empty quasi-lattice");
  const Space& space = window.space();
  const std::size_t margin = window.horizon() / 2;
  // a single point is always a (horizon/2)-net of the core, so R must stay strictly below
  if (!window.complete() && margin == 0) throw Error(Errc::insufficient_range, "window horizon too small");
  const std::size_t reach = window.complete() ? window.points().size() : margin - 1;
  DistanceMap near = distances_from(space, gamma, reach);
  QuasiLatticeProfile out;
  for (Point p : window.core(margin)) {
    auto it = near.find(p);
    if (it == near.end()) {
      throw Error(Errc::not_a_net, "set is not a net within half the horizon",
                  {{"point", key_to_json(space.key(p))}, {"reach", reach}});
    }
    out.R = std::max<std::size_t>(out.R, it->second);
  }
  if (!window.complete()) r_max = std::min(r_max, window.horizon());
  out.Q.assign(r_max + 1, 0);
  for (Point x : window.points()) {
    std::size_t lim = room(window, x, r_max);
    GrowthSample s = lattice_growth(space, gamma, x, lim);
    for (std::size_t r = 0; r <= lim; ++r) out.Q[r] = std::max(out.Q[r], s.at(r));
  }
  return out;
}

InequalityReport lattice_comparison(const Window& window, const PointSet& gamma1,
                                    const QuasiLatticeProfile& p1, const PointSet& gamma2,
                                    const QuasiLatticeProfile& p2, Point x1, Point x2,
                                    std::size_t r_max) {
  const Space& space = window.space();
  auto delta = distance(space, x1, x2, 2 * window.horizon() + window.points().size());
  if (!delta) throw Error(Errc::invalid_argument, "basepoints in different components");
  if (p2.R >= p1.Q.size()) throw Error(Errc::insufficient_range, "profile too short for Q_{R2}");
  const std::uint64_t q = p1.at(p2.R);
  const std::size_t shift = *delta + p2.R;
  const std::size_t lim2 = room(window, x2, r_max + shift);
  InequalityReport rep;
  if (lim2 < shift + 1) return rep;
  const std::size_t top = std::min(r_max, lim2 - shift);
  GrowthSample v1 = lattice_growth(space, gamma1, x1, top);
  GrowthSample v2 = lattice_growth(space, gamma2, x2, top + shift);
  for (std::size_t r = 1; r <= top; ++r) {
    ++rep.checked;
    if (v1.at(r) > q * v2.at(r + shift)) {
      rep.ok = false;
      if (!rep.first_failure) rep.first_failure = r;
    }
  }
  return rep;
}

GrowthTransfer growth_transfer(const PartialBijection& f, const Distortion& d,
                               const Window& source, const Window& target, const PointSet& gamma,
                               const PointSet& gamma_p, const QuasiLatticeProfile& profile,
                               Point x, Point xp, Point y, std::size_t r_max) {
  const Rational C = d.C, K = d.K, R(static_cast<std::int64_t>(profile.R));
  auto delta = distance(source.space(), x, y, 2 * source.horizon() + source.points().size());
  auto delta_p = distance(target.space(), xp, f(y), 2 * target.horizon() + target.points().size());
  if (!delta || !delta_p) throw Error(Errc::invalid_argument, "basepoints not connected to the anchor");
  const Rational dl(static_cast<std::int64_t>(*delta)), dlp(static_cast<std::int64_t>(*delta_p));
  GrowthTransfer out;
  std::size_t p_index = radius_of(C * R + 2 * C * K + K);
  if (p_index >= profile.Q.size()) {
    throw Error(Errc::insufficient_range, "profile too short for Q_{CR+2CK+K}", {{"index", p_index}});
  }
  out.p = profile.at(p_index);
  out.q = C * (C * dl + 4 * C * K + 2 * K + dlp + C * R) + 2 * C * K + 2 * K;
  const std::size_t lim_x = room(source, x, radius_of(C * static_cast<std::int64_t>(r_max) + out.q));
  const std::size_t lim_xp = room(target, xp, r_max);
  std::size_t top = 0;
  while (top < std::min(r_max, lim_xp) &&
         radius_of(C * static_cast<std::int64_t>(top + 1) + out.q) <= lim_x) {
    ++top;
  }
  if (top == 0) return out;
  GrowthSample lhs = lattice_growth(target.space(), gamma_p, xp, top);
  GrowthSample rhs = lattice_growth(source.space(), gamma, x, radius_of(C * static_cast<std::int64_t>(top) + out.q));
  for (std::size_t r = 1; r <= top; ++r) {
    ++out.report.checked;
    std::size_t rad = radius_of(C * static_cast<std::int64_t>(r) + out.q);
    if (lhs.at(r) > out.p * rhs.at(rad)) {
      out.report.ok = false;
      if (!out.report.first_failure) out.report.first_failure = r;
    }
  }
  return out;
}

nlohmann::json to_json(const GrowthSample& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 1; r <= s.r_max(); ++r) rows.push_back({{"r", r}, {"count", s.at(r)}});
  return {{"basepoint", key_to_json(s.basepoint)}, {"counts", rows}};
}

std::string to_csv(const GrowthSample& s) {
  std::ostringstream out;
  out << "r,count\n";
  for (std::size_t r = 1; r <= s.r_max(); ++r) out << r << ',' << s.at(r) << '\n';
  return out.str();
}

nlohmann::json to_json(const ExponentReport& e) {
  return {{"tail", {e.tail_begin, e.tail_end}},
          {"loglog", {{"fit", e.loglog_fit}, {"limsup", e.loglog_limsup}, {"liminf", e.loglog_liminf}, {"ratio", e.loglog_ratio}}},
          {"exponential", {{"fit", e.exp_fit}, {"limsup", e.exp_limsup}, {"liminf", e.exp_liminf}, {"ratio", e.exp_ratio}}}};
}

nlohmann::json to_json(const GrowthClass& c) {
  nlohmann::json j = {{"label", to_string(c.label)}, {"exponents", to_json(c.exponents)}};
  if (c.degree) j["degree"] = *c.degree;
  return j;
}

nlohmann::json to_json(const DominationWitness& w) { return {{"a", w.a}, {"b", w.b}, {"c", w.c}}; }

nlohmann::json to_json(const QuasiLatticeProfile& p) {
  nlohmann::json q = nlohmann::json::array();
  for (std::size_t r = 0; r < p.Q.size(); ++r) q.push_back(p.Q[r]);
  return {{"R", p.R}, {"Q", q}};
}

}  // namespace coarse
