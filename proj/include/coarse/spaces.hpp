#pragma once

#include <deque>
#include <functional>
#include <istream>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "coarse/metric.hpp"
#include "json.hpp"

namespace coarse {

// Finite graph on vertices 0..n-1; keys are {v}.
class ExplicitGraph : public Space {
 public:
  ExplicitGraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  SpaceKind kind() const override { return SpaceKind::explicit_graph; }
  std::optional<std::size_t> degree_bound() const override { return max_degree_; }
  std::vector<LabeledEdge> edges(Point p) const override;
  Key key(Point p) const override { return Key{static_cast<std::int64_t>(p.id)}; }
  std::optional<Point> find(const Key& k) const override;
  std::string describe() const override;
  std::size_t known_size() const override { return adj_.size(); }

  std::size_t size() const { return adj_.size(); }
  std::size_t edge_count() const { return edge_count_; }

 private:
  std::vector<std::vector<std::uint32_t>> adj_;
  std::size_t max_degree_ = 0;
  std::size_t edge_count_ = 0;
};

ExplicitGraph read_edge_list(std::istream& in);
ExplicitGraph graph_from_json(const nlohmann::json& doc);
// Dispatches on content: a JSON object or a plain edge list.
ExplicitGraph load_graph_file(const std::string& path);
ExplicitGraph path_graph(std::size_t n);
ExplicitGraph cycle_graph(std::size_t n);

struct ExploreLimits {
  std::size_t horizon = 64;          // max BFS depth from the root
  std::size_t max_vertices = 5'000'000;
};

// Graph discovered breadth-first from a root through a neighbor function on keys.
// Reads of explored layers take a shared lock; expansion is single-writer.
class LazyGraph : public Space {
 public:
  using Expander = std::function<std::vector<std::pair<int, Key>>(const Key&)>;

  LazyGraph(Key root, Expander expand, ExploreLimits limits, SpaceKind kind,
            std::optional<std::size_t> degree_bound, std::string description);

  SpaceKind kind() const override { return kind_; }
  std::optional<std::size_t> degree_bound() const override { return degree_bound_; }
  std::vector<LabeledEdge> edges(Point p) const override;
  Key key(Point p) const override;
  std::optional<Point> find(const Key& k) const override;
  std::string describe() const override { return description_; }
  std::size_t known_size() const override;

  Point root() const { return Point{0}; }
  const ExploreLimits& limits() const { return limits_; }
  std::size_t root_depth(Point p) const;
  // True once exploration found no new points: the component is finite and known.
  bool exhausted() const;
  // Explores layers until the given depth has adjacency (or the graph is exhausted).
  void explore_to(std::size_t depth) const;

 private:
  void expand_through(std::size_t depth) const;  // caller holds the unique lock

  Expander expand_;
  ExploreLimits limits_;
  SpaceKind kind_;
  std::optional<std::size_t> degree_bound_;
  std::string description_;

  mutable std::shared_mutex mu_;
  mutable std::deque<Key> keys_;
  mutable std::unordered_map<Key, std::uint32_t, KeyHash> index_;
  mutable std::vector<std::uint32_t> depth_;
  mutable std::deque<std::vector<LabeledEdge>> adj_;
  mutable std::vector<std::uint32_t> layer_start_;
  mutable std::size_t expanded_layers_ = 0;
  mutable bool exhausted_ = false;
};

// Cayley graph of Z^d with generators ±e_i (labels 2i, 2i+1).
std::unique_ptr<LazyGraph> make_lattice(std::size_t d, ExploreLimits limits);
// Cayley graph of the free group on k letters; keys are reduced words over ±1..±k.
std::unique_ptr<LazyGraph> make_free_group(std::size_t k, ExploreLimits limits);
// K-regular tree; keys are child-index paths from the root.
std::unique_ptr<LazyGraph> make_regular_tree(std::size_t K, ExploreLimits limits);

}  // namespace coarse
