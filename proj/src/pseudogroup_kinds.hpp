#pragma once

#include <memory>

#include "coarse/pseudogroup.hpp"

namespace coarse {

// Rotation z ↦ z ± α of R/Z; points are values (a + b√D)/c in [0, 1) keyed as {a, b, c}.
class RotationPseudogroup : public Pseudogroup {
 public:
  RotationPseudogroup(QuadField field, Quad alpha, nlohmann::json params);

  const QuadField& field() const { return field_; }
  const Quad& alpha() const { return alpha_; }
  Key encode(const Quad& v) const { return Key{v.a, v.b, v.c}; }
  Quad decode(const Key& k) const { return Quad{k[0], k[1], k[2]}; }
  // Open arc (lo, hi) when open is set, else [lo, hi); wraps when lo > hi.
  bool in_arc(const Quad& v, const Rational& lo, const Rational& hi, bool open) const;

  std::string kind() const override { return "rotation"; }
  std::string describe() const override;
  nlohmann::json params() const override { return params_; }
  std::optional<Key> apply(std::size_t gen, const Key& x) const override;
  Key parse_point(const nlohmann::json& j) const override;
  nlohmann::json point_json(const Key& x) const override;
  Key transport_origin() const override { return Key{0}; }
  std::optional<TransportStep> transport(const Key& x, std::size_t gen,
                                         const Key& state) const override;
  bool same_action(const Key& x, const Key& s1, const Key& s2) const override;
  bool agrees(const Key&, const Key&, const std::vector<Key>&) const override { return true; }
  nlohmann::json neighborhood_json(const Key& x, const std::vector<Key>& reads) const override;
  std::optional<Key> cell(const Key& x, std::size_t depth) const override;
  nlohmann::json cell_json(const Key& cell, std::size_t depth) const override;

 protected:
  std::optional<std::function<bool(const Key&)>> kind_predicate(const nlohmann::json& j) const override;

 private:
  QuadField field_;
  Quad alpha_;
  nlohmann::json params_;
};

std::shared_ptr<Pseudogroup> make_rotation(const nlohmann::json& params);
std::shared_ptr<Pseudogroup> make_zd(const nlohmann::json& params);
std::shared_ptr<Pseudogroup> make_shift(const nlohmann::json& params);
std::shared_ptr<Pseudogroup> make_tree(const nlohmann::json& params);
std::shared_ptr<Pseudogroup> make_custom(const nlohmann::json& params);
std::shared_ptr<Pseudogroup> make_double(PseudogroupPtr base);

}  // namespace coarse
