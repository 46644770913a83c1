#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coarse/metric.hpp"
#include "json.hpp"

namespace coarse {

struct Component {
  PointSet points;
  bool escaping = false;  // meets the outer μ-shell of the window
  std::optional<std::size_t> parent;  // index into the previous level
};

// Coarse μ-connected components of window ∖ removed, ordered by least key. Requires every
// removed point in the μ-core of the window (margin_too_small).
std::vector<Component> mu_components(const Window& window, const PointSet& removed, std::size_t mu);

struct ComponentForest {
  Key basepoint;
  std::size_t mu = 1;
  std::size_t horizon = 0;
  bool complete = false;
  std::size_t radius_offset = 0;
  // levels[n-1] are the components of window ∖ B(x0, n + radius_offset), B the open ball
  std::vector<std::vector<Component>> levels;
  std::size_t depth() const { return levels.size(); }
  std::size_t removed_radius(std::size_t n) const { return n + radius_offset; }
  std::size_t escaping_count(std::size_t n) const;
};

// Requires horizon >= depth + radius_offset + 3μ unless the window is complete.
ComponentForest end_tree(const Window& window, std::size_t mu, std::size_t depth,
                         std::size_t radius_offset = 0);

enum class EndKind { zero, one, two, finite, cantor_like, inconclusive };

struct EndClass {
  EndKind kind = EndKind::inconclusive;
  std::size_t count = 0;  // for zero/one/two/finite
};

std::string to_string(const EndClass& c);

// Stable escaping count over the last half of the levels gives 0/1/2/finite(k); strictly
// increasing counts where every escaping component splits within depth/2 further levels give
// cantor-like. Anything else, or fewer than 4 levels, is inconclusive.
EndClass end_classification(const ComponentForest& forest);

// map[n-1][i] = index of the component of `to` at level n containing component i of `from`,
// or nullopt if no single component contains it.
using LevelMap = std::vector<std::vector<std::optional<std::size_t>>>;

// Containment map between forests over the same window and basepoint whose removed balls at
// every level satisfy from ⊇ to.
LevelMap containment_map(const ComponentForest& from, const ComponentForest& to);
// θ: μ-components to ν-components over the same removed balls (μ <= ν).
LevelMap theta_map(const ComponentForest& mu_forest, const ComponentForest& nu_forest);
// ξ: N-components of the complement of Pen(B, ⌈(N−1)/2⌉) to 1-components of the complement of B.
LevelMap xi_map(const ComponentForest& n_forest, const ComponentForest& one_forest);

// True when the map is defined on every escaping component and restricts to a bijection between
// escaping components at every level.
bool bijective_on_escaping(const LevelMap& map, const ComponentForest& from, const ComponentForest& to);

nlohmann::json to_json(const Space& space, const ComponentForest& forest);
std::string to_dot(const ComponentForest& forest);

}  // namespace coarse
