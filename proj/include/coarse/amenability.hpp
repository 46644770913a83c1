#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coarse/metric.hpp"
#include "coarse/rational.hpp"
#include "json.hpp"

namespace coarse {

// |∂_r S| / |S|. The window version requires Pen(S,r) inside the window (margin_too_small).
Rational iso_ratio(const Window& window, const PointSet& s, std::size_t r);
Rational iso_ratio(const Space& space, const PointSet& s, std::size_t r);

struct FolnerCertificate {
  std::vector<PointSet> sets;                 // S_1 ⊂ S_2 ⊂ ...
  std::vector<std::size_t> radii;
  std::vector<std::vector<Rational>> ratios;  // ratios[n-1][i] for radii[i]
  bool budget_exhausted = false;
  std::string stop_reason;
  bool non_vanishing = false;  // late ratios stay above half the early ones
};

struct FolnerBudget {
  std::size_t max_n = 20;
  std::size_t max_size = 100000;
};

enum class FolnerStrategy { balls, shaved };

// S_n = B̄(center, n), optionally shaved greedily at r = 1 while keeping S_{n-1} ⊂ S_n.
// Stops early (flagged) when a set exceeds max_size or leaves the window core.
FolnerCertificate folner_search(const Window& window, const FolnerBudget& budget,
                                FolnerStrategy strategy = FolnerStrategy::balls,
                                const std::vector<std::size_t>& radii = {1});

using Schedule = std::function<Rational(std::size_t)>;
// n ↦ a/n
Schedule harmonic_schedule(const Rational& a);
// Parses "a/n" (a an integer or p/q).
Schedule parse_schedule(const std::string& text);

struct FolnerViolation {
  std::size_t n = 0, r = 0;
  Rational ratio, epsilon;
};

struct FolnerReport {
  bool accepted = false;
  bool nested = true;
  bool ratios_match = true;
  bool lambda_ok = true;  // |∂_r S| <= Λ_{K,r-1} |∂_1 S|
  std::size_t checked = 0;
  std::optional<FolnerViolation> violation;
};

// Recomputes every ratio from the sets and accepts iff ratio(n,r) <= ε_n throughout.
FolnerReport verify_folner(const Window& window, const FolnerCertificate& cert,
                           const std::vector<std::size_t>& radii, const Schedule& schedule);

struct IsoInfimum {
  PointSet best;
  Rational ratio;
  bool exhaustive = false;
  std::size_t searched = 0;
};

// Minimal |∂_1 S|/|S| over connected S ∋ x with |S| <= max_size, by enumerating each such set
// once. Ties prefer smaller sets, then canonical keys. Never throws on the budget; the
// exhaustive flag is false if max_sets was reached.
IsoInfimum iso_infimum(const Space& space, Point x, std::size_t max_size,
                       std::size_t max_sets = 2'000'000);

// ∂^Γ_r S = {x ∈ Γ : d(x,S) <= r, d(x,Γ∖S) <= r}; S must lie in the 2r-core of the window.
PointSet lattice_boundary(const Window& window, const PointSet& gamma, const PointSet& s,
                          std::size_t r);

struct RoughTransferRow {
  std::size_t r = 0;
  Rational lhs, rhs;  // |∂^{Γ′}_r S′|/|S′| and Q_c |∂^Γ_{s_r} S|/|S|
};

struct RoughTransferReport {
  bool ok = true;
  std::vector<RoughTransferRow> rows;
};

// For a rough equivalence phi: Γ -> Γ′ = phi(Γ) with expansiveness s and closeness c,
// checks |∂^{Γ′}_r S′|/|S′| <= Q_c |∂^Γ_{s_r} S|/|S| for S′ = phi(S).
RoughTransferReport rough_transfer(const std::unordered_map<Point, Point, PointHash>& phi,
                                   const Window& source, const Window& target,
                                   const PointSet& gamma, const std::vector<std::uint32_t>& s,
                                   std::uint64_t q_c, const PointSet& set,
                                   const std::vector<std::size_t>& radii);

nlohmann::json to_json(const Space& space, const FolnerCertificate& cert);
FolnerCertificate certificate_from_json(const Space& space, const nlohmann::json& j);
nlohmann::json to_json(const FolnerReport& r);
nlohmann::json to_json(const Space& space, const IsoInfimum& r);

}  // namespace coarse
