#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarse/cqi.hpp"
#include "coarse/metric.hpp"
#include "coarse/rational.hpp"
#include "json.hpp"

namespace coarse {

// counts[r] = |Γ ∩ B̄(x,r)| for r = 0..r_max (Γ = whole space for growth_function).
struct GrowthSample {
  Key basepoint;
  std::vector<std::uint64_t> counts;
  std::size_t r_max() const { return counts.empty() ? 0 : counts.size() - 1; }
  std::uint64_t at(std::size_t r) const { return counts.at(r); }
};

GrowthSample growth_function(const Space& space, Point x, std::size_t r_max);
// Growth function induced by a quasi-lattice; balls are taken in the ambient space.
GrowthSample lattice_growth(const Space& space, const PointSet& gamma, Point x, std::size_t r_max);

struct DominationWitness {
  std::uint64_t a = 1, b = 1, c = 1;
  friend bool operator==(const DominationWitness&, const DominationWitness&) = default;
};

struct DominationCaps {
  std::uint64_t a_max = 10, b_max = 10, c_max = 10;
};

// u(r) <= a v(br) on every sampled r >= c with br within v's range.
bool verify_domination(const GrowthSample& u, const GrowthSample& v, const DominationWitness& w);
// Search order: b, then c, then the least a. Only b with b·r_max(u) <= r_max(v) are tried, and c
// is limited so that at least half of u's radii are tested. Throws insufficient_range if even b=1
// does not fit.
std::optional<DominationWitness> check_domination(const GrowthSample& u, const GrowthSample& v,
                                                  const DominationCaps& caps = {});
// u ≼ v by w1 and v ≼ w by w2 give u ≼ w by (aa′, bb′, max{c, ⌈c′/b⌉}).
DominationWitness compose_domination(const DominationWitness& w1, const DominationWitness& w2);

struct ExponentReport {
  std::size_t tail_begin = 0, tail_end = 0;  // radii used, inclusive
  // slope of log v against log r: least squares, and max/min of consecutive secants
  double loglog_fit = 0, loglog_limsup = 0, loglog_liminf = 0;
  // slope of log v against r
  double exp_fit = 0, exp_limsup = 0, exp_liminf = 0;
  // raw quotients at r_max
  double loglog_ratio = 0, exp_ratio = 0;
};

ExponentReport growth_exponents(const GrowthSample& sample, const Rational& tail_fraction = Rational(1, 2));

enum class GrowthLabel {
  polynomial,
  exponential,
  quasi_exponential,
  quasi_polynomial,
  pseudo_quasi_polynomial,
  inconclusive
};
std::string to_string(GrowthLabel label);

struct GrowthClass {
  GrowthLabel label = GrowthLabel::inconclusive;
  std::optional<std::int64_t> degree;  // for polynomial
  ExponentReport exponents;
};

GrowthClass classify_growth(const GrowthSample& sample, double tolerance = 0.15,
                            const Rational& tail_fraction = Rational(1, 2));

struct QuasiLatticeProfile {
  std::size_t R = 0;
  std::vector<std::uint64_t> Q;  // Q[r], r = 0..r_max
  std::uint64_t at(std::size_t r) const { return Q.at(r); }
};

// Minimal R over the window's core (margin horizon/2) and exact Q_r over centers whose ball
// B̄(x,r) lies in the window. Throws not_a_net unless every core point is closer than horizon/2 to Γ.
QuasiLatticeProfile quasi_lattice_profile(const Window& window, const PointSet& gamma,
                                          std::size_t r_max);

struct InequalityReport {
  bool ok = true;
  std::size_t checked = 0;
  std::optional<std::size_t> first_failure;  // radius
};

// v_{Γ1}(x1,r) <= Q¹_{R2} v_{Γ2}(x2, r+δ+R2) for r = 1..r_max with the right side inside the window.
InequalityReport lattice_comparison(const Window& window, const PointSet& gamma1,
                                    const QuasiLatticeProfile& p1, const PointSet& gamma2,
                                    const QuasiLatticeProfile& p2, Point x1, Point x2,
                                    std::size_t r_max);

struct GrowthTransfer {
  std::uint64_t p = 0;
  Rational q;
  InequalityReport report;
};

// For a (K,C)-CQI f between the windows, both lattices (R,Q_r)-quasi-lattices (the profile is
// the pointwise maximum), x ∈ Γ, x′ ∈ Γ′, y ∈ dom f: v_{Γ′}(x′,r) <= p v_Γ(x, Cr+q) with
// p = Q_{CR+2CK+K}, q = C(Cδ+4CK+2K+δ′+CR)+2CK+2K, δ = d(x,y), δ′ = d′(x′,f(y)).
GrowthTransfer growth_transfer(const PartialBijection& f, const Distortion& d,
                               const Window& source, const Window& target, const PointSet& gamma,
                               const PointSet& gamma_p, const QuasiLatticeProfile& profile,
                               Point x, Point xp, Point y, std::size_t r_max);

nlohmann::json to_json(const GrowthSample& s);
std::string to_csv(const GrowthSample& s);
nlohmann::json to_json(const ExponentReport& e);
nlohmann::json to_json(const GrowthClass& c);
nlohmann::json to_json(const DominationWitness& w);
nlohmann::json to_json(const QuasiLatticeProfile& p);

}  // namespace coarse
