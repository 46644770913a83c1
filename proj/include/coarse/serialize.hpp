#pragma once

#include "coarse/metric.hpp"
#include "coarse/rational.hpp"
#include "json.hpp"

namespace coarse {

// Single-coordinate keys encode as a bare integer, others as arrays.
nlohmann::json key_to_json(const Key& k);
Key key_from_json(const nlohmann::json& j);
// Canonically ordered list of point encodings.
nlohmann::json set_to_json(const Space& space, const PointSet& s);
PointSet set_from_json(const Space& space, const nlohmann::json& j);
nlohmann::json rational_to_json(const Rational& q);
Rational rational_from_json(const nlohmann::json& j);

}  // namespace coarse
