#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coarse/cqi.hpp"
#include "coarse/metric.hpp"
#include "json.hpp"

namespace coarse {

// families[i] = V_i; members are point sets of the window.
struct ColoredCover {
  std::size_t R = 0;
  std::size_t D = 0;
  std::vector<std::vector<PointSet>> families;
  std::size_t colors() const { return families.size(); }  // n + 1
};

struct CoverViolation {
  std::string kind;  // "uncovered", "outside-window", "diameter", "separation"
  std::size_t family = 0;
  std::vector<std::size_t> members;
  std::vector<Key> points;
  std::optional<std::size_t> distance;
};

struct CoverReport {
  bool ok = true;
  std::size_t members_checked = 0;
  std::optional<CoverViolation> violation;
};

// Exact check: members inside the window, union = window, diameters <= D, and members of one
// family at distance > R. Distances are taken in the ambient space.
CoverReport verify_cover(const Window& window, const ColoredCover& cover);

enum class CoverStrategy { annulus, bricks };
std::string to_string(CoverStrategy s);

// Annuli of width R about the center, alternately colored, split into coarse R-connected
// pieces; fails unless every piece has diameter <= 3R. Bricks (two-dimensional lattices only):
// 3R×3R bricks, row j shifted by jR, colored (a − j) mod 3. Always verified before returning;
// throws construction_failed otherwise.
ColoredCover slab_cover(const Window& window, std::size_t R, CoverStrategy strategy);

struct AsdimEntry {
  std::size_t R = 0;
  std::optional<std::size_t> n;  // least dimension certified
  std::optional<ColoredCover> cover;
  std::string method;  // "whole", "annulus", "bricks" or the failure reason
};

// For each R the least n with a verified cover: 0 for complete windows (one member), then the
// annulus cover (n = 1), then bricks (n = 2) when the space is a two-dimensional lattice.
std::vector<AsdimEntry> asdim_profile(const Window& window, const std::vector<std::size_t>& radii);

// Pushes a cover of the source window through a (K,C)-CQI f. Target points take the member of the
// nearest image point (within K); D becomes ⌈CD + 2CK⌉ and R becomes ⌊R/C − 2K⌋.
ColoredCover push_cover(const ColoredCover& cover, const PartialBijection& f, const Distortion& d,
                        const Window& target);

nlohmann::json to_json(const Space& space, const ColoredCover& cover);
ColoredCover cover_from_json(const Space& space, const nlohmann::json& j);
nlohmann::json to_json(const CoverReport& r);

}  // namespace coarse
