#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarse/metric.hpp"
#include "coarse/rational.hpp"
#include "json.hpp"

namespace coarse {

struct Distortion {
  Rational K{0};
  Rational C{1};
};

struct LslConstants {
  Rational lambda{1};
  Rational b{0};
  Rational c{0};
};

// Finite injective map between two spaces.
class PartialBijection {
 public:
  PartialBijection() = default;
  // Throws invalid_argument if the pairs are not a bijection onto their image.
  explicit PartialBijection(std::vector<std::pair<Point, Point>> pairs);

  std::size_t size() const { return fwd_.size(); }
  bool empty() const { return fwd_.empty(); }
  bool defined(Point x) const;
  Point operator()(Point x) const;  // throws when undefined
  std::optional<Point> inverse(Point y) const;
  PointSet domain() const;
  PointSet image() const;
  // Sorted by source id.
  const std::vector<std::pair<Point, Point>>& pairs() const { return fwd_; }
  PartialBijection restrict_to(const PointSet& s) const;
  PartialBijection inverted() const;

 private:
  std::vector<std::pair<Point, Point>> fwd_;
  std::vector<std::pair<Point, Point>> bwd_;
};

// Total map on a window's points.
using PointMap = std::unordered_map<Point, Point, PointHash>;

struct Violation {
  std::string kind;
  std::vector<Key> points;
  std::uint32_t d_source = kUnreached;
  std::uint32_t d_target = kUnreached;
};

struct CqiReport {
  bool domain_net_ok = true;
  bool image_net_ok = true;
  bool bilip_ok = true;
  bool net_ok() const { return domain_net_ok && image_net_ok; }
  bool ok() const { return net_ok() && bilip_ok; }
  std::size_t rim_censored_domain = 0;
  std::size_t rim_censored_image = 0;
  std::size_t pairs_checked = 0;
  std::vector<Key> uncovered;         // first ten core points missed by a net
  std::vector<Violation> violations;  // first ten failing pairs
};

// Checks the definition of a (K,C) coarse quasi-isometry on the windows.
// Net claims are only made for points at distance at least K from the rim.
CqiReport verify_cqi(const PartialBijection& f, const Window& source, const Window& target,
                     const Distortion& d);

// Greedy maximal K-separated subset in BFS order from x0 (ties canonical); a K-net of the window.
PointSet separated_net(const Window& window, std::size_t K, Point x0);
// Same greedy rule applied to the candidate set only.
PointSet separated_subnet(const Window& window, const PointSet& candidates, std::size_t K,
                          std::optional<Point> first);
// True if every core point (margin K) is within K of s.
bool is_net(const Window& window, const PointSet& s, std::size_t K);

struct MatchingResult {
  PartialBijection h;
  Distortion claimed;
  PointSet subnet1, subnet2;
  std::size_t unmatched = 0;  // subnet points near the rim with no partner
};

MatchingResult net_matching(const Window& window, const PointSet& a1, const PointSet& a2,
                            std::size_t K, std::optional<std::pair<Point, Point>> pin = std::nullopt);

struct CompositeResult {
  PartialBijection g;
  Distortion claimed;
  MatchingResult matching;
};

// Composite of f: M -> M' and f2: M' -> M'' sharing the distortion d.
CompositeResult coarse_composite(const PartialBijection& f, const PartialBijection& f2,
                                 const Window& w, const Window& w1, const Window& w2,
                                 const Distortion& d,
                                 std::optional<std::pair<Point, Point>> pin = std::nullopt);

struct LslResult {
  PointMap phi;  // on the source window
  PointMap psi;  // on the target window
  LslConstants claimed;
};

LslResult lsl_from_cqi(const PartialBijection& f, const Window& source, const Window& target,
                       const Distortion& d);

struct LslReport {
  bool ok = true;
  std::size_t pairs_checked = 0;
  std::vector<Violation> violations;
};

// Checks that (phi, psi) is a (lambda,b,c)-equivalence on the window cores.
LslReport verify_lsl(const PointMap& phi, const PointMap& psi, const Window& source,
                     const Window& target, const LslConstants& k, std::size_t margin);

struct CqiResult {
  PartialBijection f;
  Distortion claimed;
  Rational epsilon;
  Rational separation;  // 2c + b + epsilon
};

Rational default_epsilon(const LslConstants& k);
Distortion distortion_from_lsl(const LslConstants& k, const Rational& epsilon);

// Restricts phi to a (2c+b+eps)-separated net through x0.  The equivalence is
// checked on points at distance >= margin from the rims.
CqiResult cqi_from_lsl(const PointMap& phi, const PointMap& psi, const Window& source,
                       const Window& target, const LslConstants& k,
                       std::optional<Rational> epsilon, Point x0, std::size_t margin = 0);

struct CloseReport {
  bool ok = true;
  std::size_t checked = 0;
  std::vector<Violation> violations;
};

// f is (r,s)-close to g: every x in dom f has y in dom g with d(x,y) <= r, d'(fx,gy) <= s.
// Only x with distance >= margin from the source rim are checked.
CloseReport verify_close(const PartialBijection& f, const PartialBijection& g,
                         const Window& source, const Window& target, const Rational& r,
                         const Rational& s, std::size_t margin = 0);

struct RebaseResult {
  PartialBijection f;
  Distortion claimed;
  Rational r, s;             // closeness to the input map
  LslConstants shifted;      // constants of the pinned equivalence
  Rational epsilon;
  Point anchor;
};

RebaseResult rebase_cqi(const PartialBijection& f, const Window& source, const Window& target,
                        const Distortion& d, Point x0, Point x0p, std::size_t R,
                        std::optional<Rational> epsilon = std::nullopt);

struct ChainStep {
  PointSet F, Fp;
  PartialBijection f;
};

struct AaResult {
  PartialBijection g;
  Distortion claimed;
  std::vector<std::size_t> indices;  // chain index realizing each level
  std::size_t depth = 0;
};

// Lexicographically least ray through the restriction tree, to the given depth
// (default: chain length). Throws no_infinite_ray with the depth reached.
AaResult aa_limit(const std::vector<ChainStep>& chain, const Space& source, const Space& target,
                  const Distortion& d, std::size_t L, std::optional<std::size_t> depth = std::nullopt);

struct RoughProfile {
  std::vector<std::uint32_t> s;      // expansiveness, r = 0..r_max
  std::vector<std::uint32_t> t;      // properness
  std::vector<bool> t_unbounded;     // t_r reached the window diameter
  std::optional<std::uint32_t> c;
  std::uint32_t combined(std::size_t r) const { return std::max(s.at(r), t.at(r)); }
};

RoughProfile rough_profile(const PointMap& phi, const Window& source, const Space& target,
                           std::size_t r_max);

struct RoughEquivalence {
  PointMap g;                         // on the target window core
  std::uint32_t c = 0;
  std::vector<std::uint32_t> s_bar;   // max{s_{r+2K}, s_r + 2K}
  bool fg_close = true, gf_close = true, profile_ok = true;
  std::vector<Violation> violations;
  bool ok() const { return fg_close && gf_close && profile_ok; }
};

// s̄_r = max{s_{r+2K}, s_r + 2K} from the combined profile, for r + 2K within range.
std::vector<std::uint32_t> rough_bar(const RoughProfile& profile, std::size_t K);

RoughEquivalence rough_equivalence(const PointMap& phi, const Window& source, const Window& target,
                                   const RoughProfile& profile, std::size_t K);

nlohmann::json to_json(const PartialBijection& f, const Space& source, const Space& target);
nlohmann::json to_json(const Distortion& d);
nlohmann::json to_json(const CqiReport& r);
PartialBijection bijection_from_json(const nlohmann::json& j, const Space& source,
                                     const Space& target);

}  // namespace coarse
