#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace coarse {

// Canonical encoding of a point; lexicographic order on keys is the
// deterministic output order everywhere.
using Key = std::vector<std::int64_t>;

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept;
};

struct Point {
  std::uint32_t id = 0;
  friend constexpr auto operator<=>(Point, Point) = default;
};

struct PointHash {
  std::size_t operator()(Point p) const noexcept { return std::hash<std::uint32_t>{}(p.id); }
};

// Sorted by id, no duplicates.
using PointSet = std::vector<Point>;
using DistanceMap = std::unordered_map<Point, std::uint32_t, PointHash>;

PointSet make_set(std::vector<Point> points);
bool contains(const PointSet& s, Point p);
PointSet set_union(const PointSet& a, const PointSet& b);
PointSet set_intersection(const PointSet& a, const PointSet& b);
PointSet set_difference(const PointSet& a, const PointSet& b);
bool is_subset(const PointSet& a, const PointSet& b);

enum class SpaceKind { explicit_graph, lazy_orbit, product };
std::string to_string(SpaceKind kind);

struct LabeledEdge {
  int label = -1;
  Point to;
};

// A connected-component-wise graph metric presented through its adjacency.
// Implementations are safe to query concurrently.
class Space {
 public:
  virtual ~Space() = default;

  virtual SpaceKind kind() const = 0;
  virtual std::optional<std::size_t> degree_bound() const = 0;
  virtual std::vector<LabeledEdge> edges(Point p) const = 0;
  virtual Key key(Point p) const = 0;
  virtual std::optional<Point> find(const Key& k) const = 0;
  virtual std::string describe() const = 0;
  // Number of points currently known (all points for explicit graphs).
  virtual std::size_t known_size() const = 0;

  std::vector<Point> neighbors(Point p) const;
  Point at(const Key& k) const;  // throws invalid_argument when unknown
  bool key_less(Point a, Point b) const { return key(a) < key(b); }
};

// Ordering helpers for canonical output.
void canonical_sort(const Space& space, std::vector<Point>& points);
std::vector<Key> canonical_keys(const Space& space, const PointSet& s);

// Closed ball; ball(x,0) = {x}.
PointSet ball(const Space& space, Point x, std::size_t r);
// Open ball B(x,r) = closed ball of radius r-1; empty for r = 0.
PointSet open_ball(const Space& space, Point x, std::size_t r);
// Multi-source BFS distances, truncated at radius.
DistanceMap distances_from(const Space& space, const PointSet& sources, std::size_t radius);
// Exact distance when it is at most cap, nullopt otherwise.
std::optional<std::size_t> distance(const Space& space, Point x, Point y, std::size_t cap);

PointSet penumbra(const Space& space, const PointSet& s, std::size_t r);
// Pen(S,r) ∩ Pen(M∖S,r), complement taken in the whole space.
PointSet r_boundary(const Space& space, const PointSet& s, std::size_t r);

std::uint64_t lambda_bound(std::uint64_t K, std::uint64_t r);

// Finite truncation: the closed ball of radius horizon about center.
// The space must outlive the window.
class Window {
 public:
  Window(const Space& space, Point center, std::size_t horizon);

  const Space& space() const { return *space_; }
  Point center() const { return center_; }
  std::size_t horizon() const { return horizon_; }
  const PointSet& points() const { return points_; }
  bool contains(Point p) const { return depth_.count(p) != 0; }
  std::size_t depth(Point p) const;
  // True when the window is a whole finite connected component, so no rim exists.
  bool complete() const { return complete_; }
  // Points whose distance to the rim is at least margin (all points if complete).
  PointSet core(std::size_t margin) const;
  bool in_core(Point p, std::size_t margin) const;

 private:
  const Space* space_;
  Point center_;
  std::size_t horizon_;
  PointSet points_;
  DistanceMap depth_;
  bool complete_ = false;
};

// r-boundary with the complement relative to the window; requires Pen(S,r)
// inside the window unless it is complete. Throws margin_too_small.
PointSet r_boundary(const Window& window, const PointSet& s, std::size_t r);


inline constexpr std::uint32_t kUnreached = 0xffffffffu;

// Points within twice the horizon of the window center. Geodesics between
// window points stay inside, so BFS restricted to it gives exact distances.
DistanceMap geodesic_region(const Window& w);

// rows[i][j] = d(sources[i], targets[j]) when at most cap, kUnreached otherwise.
// A region, when given, restricts the search to its points.
std::vector<std::vector<std::uint32_t>> pairwise_distances(const Space& space,
                                                           const std::vector<Point>& sources,
                                                           const std::vector<Point>& targets,
                                                           std::size_t cap,
                                                           const DistanceMap* region = nullptr);

struct NearestSource {
  std::uint32_t distance = kUnreached;
  std::uint32_t source = 0;  // index into the source list
};

// For each target, the nearest source; ties go to the smallest source index.
// Sources are usually given in canonical order, which makes ties canonical.
std::unordered_map<Point, NearestSource, PointHash> nearest_sources(const Space& space,
                                                                    const std::vector<Point>& sources,
                                                                    const PointSet& targets,
                                                                    std::size_t cap,
                                                                    const DistanceMap* region = nullptr);

// The window plus `halo` further layers, densely indexed with CSR adjacency. A path of length
// <= 2·halo between window points stays inside, so bounded BFS here is exact up to that length.
// Lazy spaces must be explorable to horizon + halo + 1.
class DenseRegion {
 public:
  DenseRegion(const Window& window, std::size_t halo);

  std::size_t size() const { return points_.size(); }
  Point point(std::uint32_t i) const { return points_[i]; }
  std::optional<std::uint32_t> index(Point p) const;
  std::uint32_t depth(std::uint32_t i) const { return depth_[i]; }
  bool in_window(std::uint32_t i) const { return inside_[i] != 0; }
  std::size_t halo() const { return halo_; }

  // Multi-source BFS up to cap; visit(index, distance) returns false to stop early. Uses internal
  // buffers, so one region must not run BFS from two threads at once.
  void bfs(const std::vector<std::uint32_t>& sources, std::size_t cap,
           const std::function<bool(std::uint32_t, std::uint32_t)>& visit) const;

 private:
  std::vector<Point> points_;
  std::unordered_map<Point, std::uint32_t, PointHash> index_;
  std::vector<std::uint32_t> depth_, offsets_, adj_;
  std::vector<char> inside_;
  std::size_t halo_;
  mutable std::vector<std::uint32_t> stamp_, dist_, queue_;
  mutable std::uint32_t round_ = 0;
};

}  // namespace coarse
