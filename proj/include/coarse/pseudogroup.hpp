#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coarse/metric.hpp"
#include "coarse/quadratic.hpp"
#include "coarse/rational.hpp"
#include "coarse/spaces.hpp"
#include "json.hpp"

namespace coarse {

struct GeneratorInfo {
  std::string name;
  std::size_t inverse = 0;  // index of the inverse generator
};

// Symbolic tracking of a walk from x, valid for every y sharing the recorded reads with x.
struct TransportStep {
  Key state;
  std::vector<Key> reads;
};

// A finitely generated pseudogroup with exactly represented points. Points are canonical keys, so
// key equality is point equality. Generators are partial bijections listed with their inverses.
class Pseudogroup {
 public:
  virtual ~Pseudogroup() = default;

  virtual std::string kind() const = 0;
  virtual std::string describe() const = 0;
  virtual nlohmann::json params() const = 0;
  const std::vector<GeneratorInfo>& generators() const { return gens_; }
  std::size_t generator_index(const std::string& name) const;  // throws invalid_argument
  const std::vector<Key>& basepoints() const { return basepoints_; }
  void set_basepoints(std::vector<Key> points);

  // Image of x under a generator, or nullopt when x is outside its domain.
  virtual std::optional<Key> apply(std::size_t gen, const Key& x) const = 0;
  std::optional<Key> apply_word(const std::vector<std::size_t>& word, const Key& x) const;

  virtual Key parse_point(const nlohmann::json& j) const = 0;  // returns the canonical key
  virtual nlohmann::json point_json(const Key& x) const = 0;
  // Membership predicate for the kind's JSON predicate syntax (plus "points", "not", "any").
  std::function<bool(const Key&)> parse_predicate(const nlohmann::json& j) const;

  // Walk transport. A state describes the current point as a function of the starting point.
  virtual Key transport_origin() const;
  virtual std::optional<TransportStep> transport(const Key& x, std::size_t gen,
                                                 const Key& state) const;
  // True when the two states act identically on every point agreeing with x on the reads.
  virtual bool same_action(const Key& x, const Key& s1, const Key& s2) const;
  virtual bool agrees(const Key& x, const Key& y, const std::vector<Key>& reads) const;
  virtual nlohmann::json neighborhood_json(const Key& x, const std::vector<Key>& reads) const;

  // Ambient grid: the cell of x at the given depth, or nullopt if x lies beyond the grid.
  virtual std::optional<Key> cell(const Key& x, std::size_t depth) const = 0;
  virtual nlohmann::json cell_json(const Key& cell, std::size_t depth) const;

 protected:
  virtual std::optional<std::function<bool(const Key&)>> kind_predicate(const nlohmann::json& j) const;
  void add_pair(const std::string& name, const std::string& inverse_name);
  void add_involution(const std::string& name);

  std::vector<GeneratorInfo> gens_;
  std::vector<Key> basepoints_;
};

using PseudogroupPtr = std::shared_ptr<const Pseudogroup>;

// name ∈ {rotation, zd, shift, tree, custom}. Throws unsupported_name otherwise.
//   rotation: {"alpha": "p/q" | "golden" | {"a","b","c","D"}, "convergent": k (optional)}
//   zd:       {"d": n}
//   shift:    {"word": "fibonacci" | {"periodic": w} | {"left": u, "middle": w, "right": v}}
//   tree:     {"code": "ruler" | "comb" | "line" | {"edges": [[x1,y1,x2,y2], ...]}}
//   custom:   {"alphabet": "01", "rules": [{"name", "from", "to", "inverse"?}, ...]}
PseudogroupPtr make_example(const std::string& name, const nlohmann::json& params);
// Shorthand "rotation(89/144)", "zd(2)", "shift(fibonacci)", "tree(ruler)".
PseudogroupPtr parse_example(const std::string& text);
// {"kind", "params", "basepoints"}.
PseudogroupPtr pseudogroup_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Pseudogroup& pg);

// The orbit graph of x: edges z -> g(z) labeled by generator index, metric d_E.
std::unique_ptr<LazyGraph> orbit_graph(const PseudogroupPtr& pg, const Key& x, ExploreLimits limits);

struct OrbitBall {
  Key center;
  std::size_t radius = 0;
  std::vector<Key> points;                 // by (depth, key)
  std::vector<std::size_t> depth;          // d_E from the center
  std::vector<std::vector<std::size_t>> words;  // a geodesic generator word from the center
  std::vector<std::array<std::size_t, 3>> edges;  // (i, generator, j) with both ends in the ball
  bool complete = false;                   // the ball is the whole orbit
};

// Exact closed ball B̄_E(x, r). Throws budget_exhausted past max_vertices.
OrbitBall orbit_ball(const PseudogroupPtr& pg, const Key& x, std::size_t r,
                     std::size_t max_vertices = 2'000'000);
// The ball as a graph with its own path metric (the induced subgraph, loops and labels dropped).
ExplicitGraph ball_graph(const OrbitBall& ball);

struct RecurrenceReport {
  std::optional<std::size_t> R;
  std::size_t horizon = 0;
  std::size_t sample_radius = 0;
  std::size_t points_checked = 0;
  bool sampled = true;  // finitely many basepoints and a finite sample of each orbit
  std::vector<std::optional<std::size_t>> per_basepoint;
  std::optional<Key> witness;  // a sampled point with no target point within the horizon
};

// Least R <= horizon such that every point of B̄_E(x, sample_radius) is within R of V ∩ orbit, over
// all basepoints (sample_radius defaults to 2·horizon). Distances are exact.
RecurrenceReport recurrence_radius(const PseudogroupPtr& pg,
                                   const std::function<bool(const Key&)>& target,
                                   const std::vector<Key>& basepoints, std::size_t horizon,
                                   std::optional<std::size_t> sample_radius = std::nullopt,
                                   std::size_t max_vertices = 2'000'000);

struct ReebMap {
  Key x, y;
  std::size_t r = 0;
  std::vector<std::pair<Key, Key>> pairs;  // z -> φ(z) over B̄_E(x, r), in ball order
  std::size_t pairs_checked = 0;
  bool edges_preserved = true;
  bool non_expanding = true;
  bool isometric = true;  // φ is a bijection onto B̄_E(y, r) preserving d_E
};

// V(x, r): the points agreeing with x on every read made by walks of length <= r from x and by
// closed walks of length <= 4r at x. Throws holonomy_obstruction with a witness word when such a
// closed walk fixes x without fixing the neighborhood.
class ReebNeighborhood {
 public:
  ReebNeighborhood(PseudogroupPtr pg, Key x, std::size_t r, std::size_t max_vertices = 2'000'000);

  const Key& center() const { return x_; }
  std::size_t radius() const { return r_; }
  const std::vector<Key>& reads() const { return reads_; }
  bool contains(const Key& y) const;
  nlohmann::json descriptor() const;
  // φ_{x,y,r}(g(x)) = g(y); throws invalid_argument unless y ∈ V(x, r).
  ReebMap map_to(const Key& y) const;

 private:
  PseudogroupPtr pg_;
  Key x_;
  std::size_t r_;
  std::size_t max_vertices_;
  OrbitBall inner_;  // B̄_E(x, 2r)
  std::vector<Key> reads_;
};

struct ObservationWindow {
  Key center;
  std::size_t radius = 0;
};

struct LimitSample {
  std::size_t depth = 0;
  std::vector<Key> cells;  // hit by every window
  std::vector<std::size_t> cells_per_window;
};

// Grid depth for resolution eps: ⌈log2(1/eps)⌉. Throws resolution_unreachable beyond 40.
std::size_t grid_depth(const Rational& eps);
// The ε-cells met by every window ball; a finite-resolution over-approximation of the limit set.
LimitSample limit_set_sample(const PseudogroupPtr& pg, const std::vector<ObservationWindow>& windows,
                             const Rational& eps, std::size_t max_vertices = 2'000'000);

// Doubling W = Z × {0,1}: g_h(z,0) = (h(z),1) on dom h, g_h(z,1) = (h⁻¹(z),0) on im h, identity
// elsewhere, for h in E ∪ {id}. Every g_h is a total involution.
PseudogroupPtr double_of(const PseudogroupPtr& base);

struct DoubleReport {
  std::vector<std::string> generators;
  bool involutions_ok = true;
  std::size_t pairs_checked = 0;
  std::size_t points_checked = 0;
  long min_gap = 0, max_gap = 0;  // over sampled pairs, d_F − d_E
  bool bounds_ok = true;          // d_E <= d_F <= d_E + 1
  std::optional<std::pair<Key, Key>> violation;
};

struct GroupDouble {
  PseudogroupPtr doubled;
  DoubleReport report;
};

// Builds the doubling and compares d_F on ι₀(orbit) with d_E on radius windows about each
// basepoint.
GroupDouble group_double(const PseudogroupPtr& base, std::size_t radius);

struct RotationDemoRow {
  std::size_t n = 0;
  Rational arc_lo, arc_hi;  // I_n
  Key x;                    // an orbit point in I_n
  long steps = 0;           // x = h^steps(basepoint)
  bool ball_is_orbit_segment = false;  // B̄_E(x,n) = {h^i(x) : |i| <= n}
  bool ball_in_A = false;
  std::size_t ball_size = 0;
};

struct RotationDemo {
  Rational measure_bound;  // Σ |h^i(I_n)| over the arcs used
  std::vector<RotationDemoRow> rows;
};

// A = ⋃_n ⋃_{|i|<=n} h^i(I_n) with |I_n| = 1/((2n+1)2^(n+2)), so |A| <= 1/4 on a circle of length 1.
// For each n the orbit of the basepoint meets I_n at x, and B̄_E(x, n) ⊆ A, so the complement of A
// is not an n-net. Requires a rotation example; fails with construction_failed if the orbit misses I_n.
RotationDemo rotation_demo(const PseudogroupPtr& rotation, std::size_t n_max,
                           std::size_t max_steps = 1'000'000);

nlohmann::json to_json(const Pseudogroup& pg, const OrbitBall& ball);
nlohmann::json to_json(const Pseudogroup& pg, const RecurrenceReport& r);
nlohmann::json to_json(const Pseudogroup& pg, const ReebMap& m);
nlohmann::json to_json(const Pseudogroup& pg, const LimitSample& s);
nlohmann::json to_json(const Pseudogroup& pg, const DoubleReport& r);
nlohmann::json to_json(const Pseudogroup& pg, const RotationDemo& d);

}  // namespace coarse
