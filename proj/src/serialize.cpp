#include "coarse/serialize.hpp"

#include "coarse/error.hpp"

namespace coarse {

nlohmann::json key_to_json(const Key& k) {
  if (k.size() == 1) return k[0];
  return nlohmann::json(k);
}

Key key_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Key{j.get<std::int64_t>()};
  if (j.is_array()) {
    Key k;
    for (const auto& v : j) {
      if (!v.is_number_integer()) throw Error(Errc::parse_error, "point encoding must hold integers");
      k.push_back(v.get<std::int64_t>());
    }
    return k;
  }
  throw Error(Errc::parse_error, "point encoding must be an integer or an integer array");
}

nlohmann::json set_to_json(const Space& space, const PointSet& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const Key& k : canonical_keys(space, s)) out.push_back(key_to_json(k));
  return out;
}

PointSet set_from_json(const Space& space, const nlohmann::json& j) {
  if (!j.is_array()) throw Error(Errc::parse_error, "point set must be an array");
  std::vector<Point> pts;
  for (const auto& v : j) pts.push_back(space.at(key_from_json(v)));
  return make_set(std::move(pts));
}

nlohmann::json rational_to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw Error(Errc::parse_error, "rational must be an integer or a \"p/q\" string");
}

}  // namespace coarse
