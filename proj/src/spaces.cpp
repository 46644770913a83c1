#include "coarse/spaces.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "coarse/error.hpp"

namespace coarse {

ExplicitGraph::ExplicitGraph(std::size_t n,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : adj_(n) {
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw Error(Errc::invalid_argument, "edge endpoint out of range", {{"u", u}, {"v", v}, {"n", n}});
    }
    if (u == v) continue;
    adj_[u].push_back(static_cast<std::uint32_t>(v));
    adj_[v].push_back(static_cast<std::uint32_t>(u));
  }
  for (auto& list : adj_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    max_degree_ = std::max(max_degree_, list.size());
    edge_count_ += list.size();
  }
  edge_count_ /= 2;
}

std::vector<LabeledEdge> ExplicitGraph::edges(Point p) const {
  if (p.id >= adj_.size()) throw Error(Errc::invalid_argument, "vertex out of range");
  std::vector<LabeledEdge> out;
  out.reserve(adj_[p.id].size());
  for (std::uint32_t v : adj_[p.id]) out.push_back({-1, Point{v}});
  return out;
}

std::optional<Point> ExplicitGraph::find(const Key& k) const {
  if (k.size() != 1 || k[0] < 0 || static_cast<std::size_t>(k[0]) >= adj_.size()) return std::nullopt;
  return Point{static_cast<std::uint32_t>(k[0])};
}

std::string ExplicitGraph::describe() const {
  return "graph(" + std::to_string(adj_.size()) + " vertices, " + std::to_string(edge_count_) + " edges)";
}

ExplicitGraph read_edge_list(std::istream& in) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    if (!(ls >> u) || u < 0) {
      throw Error(Errc::parse_error, "bad edge-list line " + std::to_string(line_no), {{"line", line}});
    }
    std::string rest;
    if (!(ls >> v)) {
      ls.clear();
      if (ls >> rest) {
        throw Error(Errc::parse_error, "bad edge-list line " + std::to_string(line_no), {{"line", line}});
      }
      n = std::max(n, static_cast<std::size_t>(u) + 1);  // isolated vertex
      continue;
    }
    if (v < 0 || (ls >> rest)) {
      throw Error(Errc::parse_error, "bad edge-list line " + std::to_string(line_no), {{"line", line}});
    }
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    n = std::max({n, static_cast<std::size_t>(u) + 1, static_cast<std::size_t>(v) + 1});
  }
  return ExplicitGraph(n, edges);
}

ExplicitGraph graph_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("vertices") || !doc["vertices"].is_number_unsigned()) {
    throw Error(Errc::parse_error, "graph JSON needs an unsigned \"vertices\" field");
  }
  std::size_t n = doc["vertices"].get<std::size_t>();
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (doc.contains("edges")) {
    for (const auto& e : doc["edges"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
        throw Error(Errc::parse_error, "graph JSON edges must be [u,v] pairs of unsigned integers");
      }
      edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
  }
  return ExplicitGraph(n, edges);
}

ExplicitGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open graph file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, std::string("graph JSON: ") + e.what());
    }
    return graph_from_json(doc);
  }
  std::istringstream ss(text);
  return read_edge_list(ss);
}

ExplicitGraph path_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return ExplicitGraph(n, edges);
}

ExplicitGraph cycle_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return ExplicitGraph(n, edges);
}

LazyGraph::LazyGraph(Key root, Expander expand, ExploreLimits limits, SpaceKind kind,
                     std::optional<std::size_t> degree_bound, std::string description)
    : expand_(std::move(expand)),
      limits_(limits),
      kind_(kind),
      degree_bound_(degree_bound),
      description_(std::move(description)) {
  index_.emplace(root, 0);
  keys_.push_back(std::move(root));
  depth_.push_back(0);
  adj_.emplace_back();
  layer_start_ = {0, 1};
}

std::vector<LabeledEdge> LazyGraph::edges(Point p) const {
  {
    std::shared_lock lock(mu_);
    if (p.id >= keys_.size()) throw Error(Errc::invalid_argument, "unknown point id");
    if (exhausted_ || depth_[p.id] < expanded_layers_) return adj_[p.id];
  }
  std::unique_lock lock(mu_);
  expand_through(depth_[p.id]);
  return adj_[p.id];
}

Key LazyGraph::key(Point p) const {
  std::shared_lock lock(mu_);
  if (p.id >= keys_.size()) throw Error(Errc::invalid_argument, "unknown point id");
  return keys_[p.id];
}

std::optional<Point> LazyGraph::find(const Key& k) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(k);
  if (it == index_.end()) return std::nullopt;
  return Point{it->second};
}

std::size_t LazyGraph::known_size() const {
  std::shared_lock lock(mu_);
  return keys_.size();
}

std::size_t LazyGraph::root_depth(Point p) const {
  std::shared_lock lock(mu_);
  if (p.id >= keys_.size()) throw Error(Errc::invalid_argument, "unknown point id");
  return depth_[p.id];
}

bool LazyGraph::exhausted() const {
  std::shared_lock lock(mu_);
  return exhausted_;
}

void LazyGraph::explore_to(std::size_t depth) const {
  std::unique_lock lock(mu_);
  expand_through(depth);
}

void LazyGraph::expand_through(std::size_t depth) const {
  while (!exhausted_ && expanded_layers_ <= depth) {
    const std::size_t layer = expanded_layers_;
    const std::uint32_t begin = layer_start_[layer], end = layer_start_[layer + 1];
    std::vector<Key> fresh;
    std::unordered_map<Key, std::uint32_t, KeyHash> fresh_index;
    std::vector<std::vector<LabeledEdge>> lists(end - begin);
    std::uint32_t next_id = static_cast<std::uint32_t>(keys_.size());
    for (std::uint32_t id = begin; id < end; ++id) {
      for (auto& [label, k] : expand_(keys_[id])) {
        std::uint32_t target;
        if (auto it = index_.find(k); it != index_.end()) {
          target = it->second;
        } else if (auto jt = fresh_index.find(k); jt != fresh_index.end()) {
          target = jt->second;
        } else {
          target = next_id++;
          fresh_index.emplace(k, target);
          fresh.push_back(std::move(k));
        }
        lists[id - begin].push_back({label, Point{target}});
      }
    }
    if (!fresh.empty() && layer + 1 > limits_.horizon) {
      throw Error(Errc::horizon_exceeded, "exploration beyond horizon of " + description_,
                  {{"horizon", limits_.horizon}});
    }
    if (keys_.size() + fresh.size() > limits_.max_vertices) {
      throw Error(Errc::budget_exhausted, "vertex budget exhausted exploring " + description_,
                  {{"max_vertices", limits_.max_vertices}});
    }
    for (std::uint32_t id = begin; id < end; ++id) adj_[id] = std::move(lists[id - begin]);
    for (Key& k : fresh) {
      index_.emplace(k, static_cast<std::uint32_t>(keys_.size()));
      keys_.push_back(std::move(k));
      depth_.push_back(static_cast<std::uint32_t>(layer + 1));
      adj_.emplace_back();
    }
    layer_start_.push_back(static_cast<std::uint32_t>(keys_.size()));
    ++expanded_layers_;
    if (fresh.empty()) exhausted_ = true;
  }
}

std::unique_ptr<LazyGraph> make_lattice(std::size_t d, ExploreLimits limits) {
  if (d == 0) throw Error(Errc::invalid_argument, "lattice dimension must be positive");
  auto expand = [d](const Key& k) {
    std::vector<std::pair<int, Key>> out;
    out.reserve(2 * d);
    for (std::size_t i = 0; i < d; ++i) {
      Key up = k, down = k;
      ++up[i];
      --down[i];
      out.emplace_back(static_cast<int>(2 * i), std::move(up));
      out.emplace_back(static_cast<int>(2 * i + 1), std::move(down));
    }
    return out;
  };
  return std::make_unique<LazyGraph>(Key(d, 0), expand, limits, SpaceKind::product, 2 * d,
                                     "Z^" + std::to_string(d));
}

std::unique_ptr<LazyGraph> make_free_group(std::size_t k, ExploreLimits limits) {
  if (k == 0) throw Error(Errc::invalid_argument, "free group rank must be positive");
  auto expand = [k](const Key& w) {
    std::vector<std::pair<int, Key>> out;
    out.reserve(2 * k);
    int label = 0;
    for (std::int64_t i = 1; i <= static_cast<std::int64_t>(k); ++i) {
      for (std::int64_t s : {i, -i}) {
        Key v = w;
        if (!v.empty() && v.back() == -s) {
          v.pop_back();
        } else {
          v.push_back(s);
        }
        out.emplace_back(label++, std::move(v));
      }
    }
    return out;
  };
  return std::make_unique<LazyGraph>(Key{}, expand, limits, SpaceKind::lazy_orbit, 2 * k,
                                     "F_" + std::to_string(k));
}

std::unique_ptr<LazyGraph> make_regular_tree(std::size_t K, ExploreLimits limits) {
  if (K < 2) throw Error(Errc::invalid_argument, "regular tree degree must be at least 2");
  auto expand = [K](const Key& path) {
    std::vector<std::pair<int, Key>> out;
    std::size_t children = path.empty() ? K : K - 1;
    if (!path.empty()) {
      Key parent(path.begin(), path.end() - 1);
      out.emplace_back(static_cast<int>(K), std::move(parent));
    }
    for (std::size_t c = 0; c < children; ++c) {
      Key child = path;
      child.push_back(static_cast<std::int64_t>(c));
      out.emplace_back(static_cast<int>(c), std::move(child));
    }
    return out;
  };
  return std::make_unique<LazyGraph>(Key{}, expand, limits, SpaceKind::lazy_orbit, K,
                                     std::to_string(K) + "-regular tree");
}

}  // namespace coarse
