#include "pseudogroup_kinds.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "coarse/error.hpp"
#include "coarse/serialize.hpp"

namespace coarse {

namespace {

std::int64_t pos_mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

// Length of the primitive root of w (the least period dividing |w|).
std::size_t primitive_period(const std::string& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return p;
  }
  return n;
}

std::int64_t get_int(const nlohmann::json& j, const char* what) {
  if (!j.is_number_integer()) throw Error(Errc::parse_error, std::string(what) + " must be an integer");
  return j.get<std::int64_t>();
}

std::string get_string(const nlohmann::json& j, const char* what) {
  if (!j.is_string()) throw Error(Errc::parse_error, std::string(what) + " must be a string");
  return j.get<std::string>();
}

}  // namespace

// ---------------------------------------------------------------- rotation

RotationPseudogroup::RotationPseudogroup(QuadField field, Quad alpha, nlohmann::json params)
    : field_(field), alpha_(field.frac(alpha)), params_(std::move(params)) {
  add_pair("+a", "-a");
  basepoints_ = {encode(field_.make(0, 0, 1))};
}

std::string RotationPseudogroup::describe() const {
  return "rotation by " + point_json(encode(alpha_)).dump();
}

bool RotationPseudogroup::in_arc(const Quad& v, const Rational& lo, const Rational& hi,
                                 bool open) const {
  int a = field_.compare(v, field_.from(lo)), b = field_.compare(v, field_.from(hi));
  bool above = open ? a > 0 : a >= 0;
  bool below = b < 0;
  return lo <= hi ? (above && below) : (above || below);
}

std::optional<Key> RotationPseudogroup::apply(std::size_t gen, const Key& x) const {
  Quad v = decode(x);
  Quad w = gen == 0 ? field_.add(v, alpha_) : field_.sub(v, alpha_);
  return encode(field_.frac(w));
}

Key RotationPseudogroup::parse_point(const nlohmann::json& j) const {
  Quad v;
  if (j.is_string() || j.is_number_integer()) {
    v = field_.from(rational_from_json(j));
  } else if (j.is_array() && j.size() == 3) {
    v = field_.make(get_int(j[0], "a"), get_int(j[1], "b"), get_int(j[2], "c"));
  } else if (j.is_object()) {
    v = field_.make(get_int(j.at("a"), "a"), get_int(j.value("b", nlohmann::json(0)), "b"),
                    get_int(j.value("c", nlohmann::json(1)), "c"));
  } else {
    throw Error(Errc::parse_error, "rotation point must be \"p/q\" or [a, b, c]");
  }
  return encode(field_.frac(v));
}

nlohmann::json RotationPseudogroup::point_json(const Key& x) const {
  if (x[1] == 0) return to_string(Rational(x[0], x[2]));
  return nlohmann::json::array({x[0], x[1], x[2]});
}

std::optional<TransportStep> RotationPseudogroup::transport(const Key&, std::size_t gen,
                                                            const Key& state) const {
  return TransportStep{Key{state[0] + (gen == 0 ? 1 : -1)}, {}};
}

bool RotationPseudogroup::same_action(const Key&, const Key& s1, const Key& s2) const {
  return field_.is_integer(field_.scale(alpha_, s1[0] - s2[0]));
}

nlohmann::json RotationPseudogroup::neighborhood_json(const Key&, const std::vector<Key>&) const {
  return {{"type", "arc"}, {"lo", "0"}, {"hi", "1"}, {"whole_circle", true}};
}

std::optional<Key> RotationPseudogroup::cell(const Key& x, std::size_t depth) const {
  return Key{field_.dyadic_floor(decode(x), static_cast<unsigned>(depth))};
}

nlohmann::json RotationPseudogroup::cell_json(const Key& cell, std::size_t depth) const {
  std::int64_t m = std::int64_t{1} << depth;
  return {{"lo", to_string(Rational(cell[0], m))}, {"hi", to_string(Rational(cell[0] + 1, m))}};
}

std::optional<std::function<bool(const Key&)>> RotationPseudogroup::kind_predicate(
    const nlohmann::json& j) const {
  for (const char* name : {"arc", "open_arc"}) {
    if (!j.contains(name)) continue;
    const auto& a = j.at(name);
    if (!a.is_array() || a.size() != 2) throw Error(Errc::parse_error, "arc must be [lo, hi]");
    Rational lo = rational_from_json(a[0]), hi = rational_from_json(a[1]);
    bool open = std::string(name) == "open_arc";
    return [this, lo, hi, open](const Key& k) { return in_arc(decode(k), lo, hi, open); };
  }
  return std::nullopt;
}

std::shared_ptr<Pseudogroup> make_rotation(const nlohmann::json& params) {
  if (!params.contains("alpha")) throw Error(Errc::parse_error, "rotation needs \"alpha\"");
  const auto& a = params.at("alpha");
  QuadField field(0);
  Quad alpha;
  if (a.is_string() && a.get<std::string>() == "golden") {
    field = QuadField(5);
    alpha = field.make(-1, 1, 2);
  } else if (a.is_object()) {
    field = QuadField(get_int(a.value("D", nlohmann::json(0)), "D"));
    alpha = field.make(get_int(a.at("a"), "a"), get_int(a.value("b", nlohmann::json(0)), "b"),
                       get_int(a.value("c", nlohmann::json(1)), "c"));
  } else {
    Rational q = rational_from_json(a);
    alpha = field.from(q);
  }
  if (params.contains("convergent")) {
    std::int64_t k = get_int(params.at("convergent"), "convergent");
    if (k < 0) throw Error(Errc::invalid_argument, "convergent index must be non-negative");
    auto cs = convergents(field, field.frac(alpha), static_cast<std::size_t>(k) + 1);
    Rational q = cs.back();
    field = QuadField(0);
    alpha = field.from(q);
  }
  return std::make_shared<RotationPseudogroup>(field, alpha, params);
}

// ---------------------------------------------------------------- Z^d

namespace {

class LatticePseudogroup : public Pseudogroup {
 public:
  explicit LatticePseudogroup(std::size_t d) : d_(d) {
    for (std::size_t i = 1; i <= d; ++i)
      add_pair("+e" + std::to_string(i), "-e" + std::to_string(i));
    basepoints_ = {Key(d, 0)};
  }

  std::string kind() const override { return "zd"; }
  std::string describe() const override { return "Z^" + std::to_string(d_) + " by translations"; }
  nlohmann::json params() const override { return {{"d", d_}}; }

  std::optional<Key> apply(std::size_t gen, const Key& x) const override {
    Key y = x;
    y[gen / 2] += gen % 2 == 0 ? 1 : -1;
    return y;
  }

  Key parse_point(const nlohmann::json& j) const override {
    Key k = key_from_json(j);
    if (k.size() != d_) throw Error(Errc::parse_error, "lattice point has the wrong dimension");
    return k;
  }

  nlohmann::json point_json(const Key& x) const override { return key_to_json(x); }

  Key transport_origin() const override { return Key(d_, 0); }
  std::optional<TransportStep> transport(const Key&, std::size_t gen, const Key& state) const override {
    return TransportStep{*apply(gen, state), {}};
  }
  bool agrees(const Key&, const Key&, const std::vector<Key>&) const override { return true; }

  // The grid is the box [-2^depth, 2^depth]^d; one cell per point.
  std::optional<Key> cell(const Key& x, std::size_t depth) const override {
    const std::int64_t end = std::int64_t{1} << depth;
    for (std::int64_t c : x)
      if (c > end || c < -end) return std::nullopt;
    return x;
  }

 protected:
  std::optional<std::function<bool(const Key&)>> kind_predicate(const nlohmann::json& j) const override {
    if (j.contains("mod")) {
      std::int64_t m = get_int(j.at("mod"), "mod");
      if (m <= 0) throw Error(Errc::invalid_argument, "modulus must be positive");
      Key res = key_from_json(j.at("residues"));
      if (res.size() != d_) throw Error(Errc::parse_error, "one residue per coordinate");
      return [m, res](const Key& k) {
        for (std::size_t i = 0; i < k.size(); ++i)
          if (pos_mod(k[i], m) != pos_mod(res[i], m)) return false;
        return true;
      };
    }
    if (j.contains("box")) {
      std::int64_t r = get_int(j.at("box"), "box");
      return [r](const Key& k) {
        return std::all_of(k.begin(), k.end(), [r](std::int64_t c) { return c <= r && c >= -r; });
      };
    }
    return std::nullopt;
  }

 private:
  std::size_t d_;
};

}  // namespace

std::shared_ptr<Pseudogroup> make_zd(const nlohmann::json& params) {
  std::int64_t d = get_int(params.value("d", nlohmann::json(1)), "d");
  if (d < 1 || d > 8) throw Error(Errc::invalid_argument, "zd needs 1 <= d <= 8");
  return std::make_shared<LatticePseudogroup>(static_cast<std::size_t>(d));
}

// ---------------------------------------------------------------- shift

namespace {

// A pointed bi-infinite sequence over a finite alphabet. The point {n} is the sequence read from
// coordinate n; letter-guarded generators right[a] (on x_0 = a) and left[a] (on x_{-1} = a) move
// the pointer.
class ShiftPseudogroup : public Pseudogroup {
 public:
  explicit ShiftPseudogroup(const nlohmann::json& params) : params_(params) {
    const auto& w = params.value("word", nlohmann::json("fibonacci"));
    if (w.is_string() && w.get<std::string>() == "fibonacci") {
      mode_ = Mode::fibonacci;
      field_ = QuadField(5);
      beta_ = field_.make(3, -1, 2);
      alphabet_ = "01";
    } else if (w.is_object() && w.contains("periodic")) {
      mode_ = Mode::periodic;
      right_ = get_string(w.at("periodic"), "periodic");
      if (right_.empty()) throw Error(Errc::invalid_argument, "periodic word must be nonempty");
      right_.resize(primitive_period(right_));
      period_ = static_cast<std::int64_t>(right_.size());
    } else if (w.is_object() && w.contains("right")) {
      mode_ = Mode::eventual;
      left_ = get_string(w.at("left"), "left");
      middle_ = get_string(w.value("middle", nlohmann::json("")), "middle");
      right_ = get_string(w.at("right"), "right");
      if (left_.empty() || right_.empty()) throw Error(Errc::invalid_argument, "tails must be nonempty");
      detect_period();
    } else {
      throw Error(Errc::parse_error, "shift word must be \"fibonacci\", {periodic} or {left,middle,right}");
    }
    if (alphabet_.empty()) {
      std::set<char> letters(left_.begin(), left_.end());
      letters.insert(middle_.begin(), middle_.end());
      letters.insert(right_.begin(), right_.end());
      alphabet_.assign(letters.begin(), letters.end());
    }
    for (char a : alphabet_) add_pair(std::string("right[") + a + "]", std::string("left[") + a + "]");
    basepoints_ = {Key{0}};
  }

  std::string kind() const override { return "shift"; }
  std::string describe() const override { return "shift on " + params_.value("word", nlohmann::json("fibonacci")).dump(); }
  nlohmann::json params() const override { return params_; }

  char sym(std::int64_t n) const {
    switch (mode_) {
      case Mode::fibonacci: {
        std::int64_t s = field_.floor(field_.scale(beta_, n + 1)) - field_.floor(field_.scale(beta_, n));
        return static_cast<char>('0' + s);
      }
      case Mode::periodic:
        return right_[static_cast<std::size_t>(pos_mod(n, period_))];
      case Mode::eventual: {
        const auto m = static_cast<std::int64_t>(middle_.size());
        if (n < 0) return left_[static_cast<std::size_t>(pos_mod(n, static_cast<std::int64_t>(left_.size())))];
        if (n < m) return middle_[static_cast<std::size_t>(n)];
        return right_[static_cast<std::size_t>((n - m) % static_cast<std::int64_t>(right_.size()))];
      }
    }
    return '?';
  }

  Key canon(std::int64_t n) const { return Key{period_ ? pos_mod(n, period_) : n}; }

  std::optional<Key> apply(std::size_t gen, const Key& x) const override {
    const char a = alphabet_[gen / 2];
    const std::int64_t n = x[0];
    if (gen % 2 == 0) return sym(n) == a ? std::optional<Key>(canon(n + 1)) : std::nullopt;
    return sym(n - 1) == a ? std::optional<Key>(canon(n - 1)) : std::nullopt;
  }

  Key parse_point(const nlohmann::json& j) const override { return canon(get_int(j, "shift point")); }
  nlohmann::json point_json(const Key& x) const override { return x[0]; }

  Key transport_origin() const override { return Key{0}; }
  std::optional<TransportStep> transport(const Key& x, std::size_t gen, const Key& state) const override {
    const char a = alphabet_[gen / 2];
    const std::int64_t s = state[0];
    if (gen % 2 == 0) {
      if (sym(x[0] + s) != a) return std::nullopt;
      return TransportStep{Key{s + 1}, {Key{s}}};
    }
    if (sym(x[0] + s - 1) != a) return std::nullopt;
    return TransportStep{Key{s - 1}, {Key{s - 1}}};
  }

  bool agrees(const Key& x, const Key& y, const std::vector<Key>& reads) const override {
    return std::all_of(reads.begin(), reads.end(),
                       [&](const Key& r) { return sym(x[0] + r[0]) == sym(y[0] + r[0]); });
  }

  nlohmann::json neighborhood_json(const Key& x, const std::vector<Key>& reads) const override {
    if (reads.empty()) return {{"type", "everything"}};
    std::int64_t lo = reads.front()[0], hi = lo;
    for (const Key& r : reads) {
      lo = std::min(lo, r[0]);
      hi = std::max(hi, r[0]);
    }
    std::string word;
    for (std::int64_t i = lo; i <= hi; ++i) word += sym(x[0] + i);
    return {{"type", "cylinder"}, {"lo", lo}, {"hi", hi}, {"word", word}};
  }

  // Cells are the words on coordinates [-depth, depth).
  std::optional<Key> cell(const Key& x, std::size_t depth) const override {
    Key out;
    const auto d = static_cast<std::int64_t>(depth);
    for (std::int64_t i = -d; i < d; ++i) out.push_back(sym(x[0] + i));
    return out;
  }

  nlohmann::json cell_json(const Key& cell, std::size_t) const override {
    std::string s;
    for (std::int64_t c : cell) s += static_cast<char>(c);
    return s;
  }

 protected:
  std::optional<std::function<bool(const Key&)>> kind_predicate(const nlohmann::json& j) const override {
    if (!j.contains("cylinder")) return std::nullopt;
    const auto& c = j.at("cylinder");
    std::int64_t offset = get_int(c.value("offset", nlohmann::json(0)), "offset");
    std::string word = get_string(c.at("word"), "word");
    return [this, offset, word](const Key& k) {
      for (std::size_t i = 0; i < word.size(); ++i)
        if (sym(k[0] + offset + static_cast<std::int64_t>(i)) != word[i]) return false;
      return true;
    };
  }

 private:
  enum class Mode { fibonacci, periodic, eventual };

  // The sequence is periodic iff both tails share a primitive period p and x_{i+p} = x_i across
  // the middle; then the pointer is taken mod p.
  void detect_period() {
    const std::size_t pl = primitive_period(left_), pr = primitive_period(right_);
    if (pl != pr) return;
    const auto p = static_cast<std::int64_t>(pr);
    const auto m = static_cast<std::int64_t>(middle_.size());
    for (std::int64_t i = -2 * p; i <= m + p; ++i)
      if (sym(i) != sym(i + p)) return;
    period_ = p;
  }

  nlohmann::json params_;
  Mode mode_ = Mode::fibonacci;
  QuadField field_;
  Quad beta_;
  std::string left_, middle_, right_, alphabet_;
  std::int64_t period_ = 0;
};

}  // namespace

std::shared_ptr<Pseudogroup> make_shift(const nlohmann::json& params) {
  return std::make_shared<ShiftPseudogroup>(params);
}

// ---------------------------------------------------------------- trees in Z^2

namespace {

// Subtrees of the Z^2 grid through the origin, pointed at a vertex. A pointed tree (T, v) is T
// translated by −v; it equals (T, w) iff T is invariant under v − w, which the canonical vertex
// records. Generators move the basepoint along tree edges.
class TreePseudogroup : public Pseudogroup {
 public:
  explicit TreePseudogroup(const nlohmann::json& params) : params_(params) {
    const auto& c = params.value("code", nlohmann::json("ruler"));
    if (c.is_string()) {
      const std::string code = c.get<std::string>();
      if (code == "ruler") {
        code_ = Code::ruler;
      } else if (code == "comb") {
        code_ = Code::comb;
      } else if (code == "line") {
        code_ = Code::line;
      } else {
        throw Error(Errc::unsupported_name, "unknown tree code '" + code + "'");
      }
    } else if (c.is_object() && c.contains("edges")) {
      code_ = Code::finite;
      load_finite(c.at("edges"));
    } else {
      throw Error(Errc::parse_error, "tree code must be a name or {\"edges\": [...]}");
    }
    add_pair("+x", "-x");
    add_pair("+y", "-y");
    basepoints_ = {Key{0, 0}};
  }

  std::string kind() const override { return "tree"; }
  std::string describe() const override {
    return "pointed subtree of Z^2 " + params_.value("code", nlohmann::json("ruler")).dump();
  }
  nlohmann::json params() const override { return params_; }

  // Edge from (x, y) to (x+1, y) for dir 0, to (x, y+1) for dir 1.
  bool has(std::int64_t x, std::int64_t y, std::int64_t dir) const {
    switch (code_) {
      case Code::ruler:
        if (dir == 0) return y == 0;
        return y >= 0 && y < height(x);
      case Code::comb:
        return dir == 1 || y == 0;
      case Code::line:
        return dir == 0 && y == 0;
      case Code::finite:
        return edges_.count({x, y, dir}) != 0;
    }
    return false;
  }

  bool in_tree(std::int64_t x, std::int64_t y) const {
    if (x == 0 && y == 0) return true;
    return has(x, y, 0) || has(x - 1, y, 0) || has(x, y, 1) || has(x, y - 1, 1);
  }

  Key canon(std::int64_t x, std::int64_t y) const {
    switch (code_) {
      case Code::comb:
        return Key{0, y};
      case Code::line:
        return Key{0, 0};
      default:
        return Key{x, y};
    }
  }

  std::optional<Key> apply(std::size_t gen, const Key& v) const override {
    const std::int64_t x = v[0], y = v[1];
    switch (gen) {
      case 0:
        return has(x, y, 0) ? std::optional<Key>(canon(x + 1, y)) : std::nullopt;
      case 1:
        return has(x - 1, y, 0) ? std::optional<Key>(canon(x - 1, y)) : std::nullopt;
      case 2:
        return has(x, y, 1) ? std::optional<Key>(canon(x, y + 1)) : std::nullopt;
      default:
        return has(x, y - 1, 1) ? std::optional<Key>(canon(x, y - 1)) : std::nullopt;
    }
  }

  Key parse_point(const nlohmann::json& j) const override {
    Key k = key_from_json(j);
    if (k.size() != 2) throw Error(Errc::parse_error, "tree point must be [x, y]");
    if (!in_tree(k[0], k[1])) throw Error(Errc::invalid_argument, "point is not a vertex of the tree");
    return canon(k[0], k[1]);
  }

  nlohmann::json point_json(const Key& v) const override { return nlohmann::json(v); }

  Key transport_origin() const override { return Key{0, 0}; }
  std::optional<TransportStep> transport(const Key& v, std::size_t gen, const Key& s) const override {
    const std::int64_t x = v[0] + s[0], y = v[1] + s[1];
    Key read;
    Key next = s;
    switch (gen) {
      case 0:
        read = {s[0], s[1], 0};
        ++next[0];
        break;
      case 1:
        read = {s[0] - 1, s[1], 0};
        --next[0];
        break;
      case 2:
        read = {s[0], s[1], 1};
        ++next[1];
        break;
      default:
        read = {s[0], s[1] - 1, 1};
        --next[1];
        break;
    }
    if (!has(x + read[0] - s[0], y + read[1] - s[1], read[2])) return std::nullopt;
    return TransportStep{next, {read}};
  }

  bool agrees(const Key& a, const Key& b, const std::vector<Key>& reads) const override {
    return std::all_of(reads.begin(), reads.end(), [&](const Key& r) {
      return has(a[0] + r[0], a[1] + r[1], r[2]) == has(b[0] + r[0], b[1] + r[1], r[2]);
    });
  }

  nlohmann::json neighborhood_json(const Key&, const std::vector<Key>& reads) const override {
    if (reads.empty()) return {{"type", "everything"}};
    std::int64_t radius = 0;
    for (const Key& r : reads)
      radius = std::max({radius, std::abs(r[0]) + (r[2] == 0 ? 1 : 0), std::abs(r[1]) + (r[2] == 1 ? 1 : 0)});
    return {{"type", "box"}, {"radius", radius}, {"edges_fixed", reads.size()}};
  }

  // Cells are the edge patterns inside the box [-depth, depth]^2 about the basepoint.
  std::optional<Key> cell(const Key& v, std::size_t depth) const override {
    const auto d = static_cast<std::int64_t>(depth);
    Key bits;
    std::int64_t word = 0, used = 0;
    for (std::int64_t dx = -d; dx <= d; ++dx) {
      for (std::int64_t dy = -d; dy <= d; ++dy) {
        for (std::int64_t dir = 0; dir < 2; ++dir) {
          if ((dir == 0 && dx == d) || (dir == 1 && dy == d)) continue;
          word = (word << 1) | (has(v[0] + dx, v[1] + dy, dir) ? 1 : 0);
          if (++used == 62) {
            bits.push_back(word);
            word = used = 0;
          }
        }
      }
    }
    if (used) bits.push_back(word);
    return bits;
  }

 protected:
  std::optional<std::function<bool(const Key&)>> kind_predicate(const nlohmann::json& j) const override {
    if (j.contains("degree")) {
      std::int64_t want = get_int(j.at("degree"), "degree");
      return [this, want](const Key& v) {
        std::int64_t deg = 0;
        for (std::size_t g = 0; g < 4; ++g) deg += apply(g, v).has_value();
        return deg == want;
      };
    }
    if (j.contains("on_axis")) return [](const Key& v) { return v[1] == 0; };
    return std::nullopt;
  }

 private:
  enum class Code { ruler, comb, line, finite };

  // Column x carries a vertical segment of height ν₂(x) + 1; column 0 a full upward ray.
  static std::int64_t height(std::int64_t x) {
    if (x == 0) return std::numeric_limits<std::int64_t>::max();
    std::int64_t h = 1;
    while (x % 2 == 0) {
      x /= 2;
      ++h;
    }
    return h;
  }

  void load_finite(const nlohmann::json& list) {
    if (!list.is_array()) throw Error(Errc::parse_error, "tree edges must be an array");
    std::map<std::pair<std::int64_t, std::int64_t>, std::pair<std::int64_t, std::int64_t>> parent;
    std::function<std::pair<std::int64_t, std::int64_t>(std::pair<std::int64_t, std::int64_t>)> find =
        [&](std::pair<std::int64_t, std::int64_t> v) {
          auto it = parent.find(v);
          if (it == parent.end()) {
            parent[v] = v;
            return v;
          }
          if (it->second == v) return v;
          auto root = find(it->second);
          parent[v] = root;
          return root;
        };
    find({0, 0});
    for (const auto& e : list) {
      Key k = key_from_json(e);
      if (k.size() != 4) throw Error(Errc::parse_error, "tree edge must be [x1, y1, x2, y2]");
      std::int64_t dx = k[2] - k[0], dy = k[3] - k[1];
      if (std::abs(dx) + std::abs(dy) != 1) throw Error(Errc::invalid_argument, "tree edges must join grid neighbors");
      std::int64_t x = std::min(k[0], k[2]), y = std::min(k[1], k[3]);
      std::array<std::int64_t, 3> edge{x, y, dx != 0 ? 0 : 1};
      if (!edges_.insert(edge).second) throw Error(Errc::invalid_argument, "repeated tree edge");
      auto a = find({k[0], k[1]}), b = find({k[2], k[3]});
      if (a == b) throw Error(Errc::invalid_argument, "tree edges contain a cycle");
      parent[a] = b;
    }
    auto root = find({0, 0});
    for (auto& [v, p] : parent)
      if (find(v) != root) throw Error(Errc::invalid_argument, "tree is not connected to the origin");
  }

  nlohmann::json params_;
  Code code_ = Code::ruler;
  std::set<std::array<std::int64_t, 3>> edges_;
};

}  // namespace

std::shared_ptr<Pseudogroup> make_tree(const nlohmann::json& params) {
  return std::make_shared<TreePseudogroup>(params);
}

// ---------------------------------------------------------------- prefix rewriting

namespace {

// One-sided eventually periodic sequences w p p p ..., canonical: p primitive and w as short as
// possible. A rule u -> v maps [u] onto [v] by replacing the prefix.
class CustomPseudogroup : public Pseudogroup {
 public:
  explicit CustomPseudogroup(const nlohmann::json& params) : params_(params) {
    alphabet_ = get_string(params.at("alphabet"), "alphabet");
    if (alphabet_.empty()) throw Error(Errc::invalid_argument, "alphabet must be nonempty");
    std::set<std::string> names;
    for (const auto& r : params.at("rules")) {
      std::string name = get_string(r.at("name"), "rule name");
      std::string from = get_string(r.at("from"), "from"), to = get_string(r.at("to"), "to");
      check_word(from);
      check_word(to);
      if (from == to) {
        if (!names.insert(name).second) throw Error(Errc::invalid_argument, "duplicate generator " + name);
        add_involution(name);
        rules_.push_back({from, to});
        continue;
      }
      std::string inv = r.contains("inverse") ? get_string(r.at("inverse"), "inverse") : name + "^-1";
      if (!names.insert(name).second || !names.insert(inv).second)
        throw Error(Errc::invalid_argument, "duplicate generator " + name);
      add_pair(name, inv);
      rules_.push_back({from, to});
      rules_.push_back({to, from});
    }
    if (rules_.empty()) throw Error(Errc::invalid_argument, "custom pseudogroup needs rules");
    basepoints_ = {encode(std::string(), std::string(1, alphabet_[0]))};
  }

  std::string kind() const override { return "custom"; }
  std::string describe() const override { return "prefix rewriting over '" + alphabet_ + "'"; }
  nlohmann::json params() const override { return params_; }

  std::optional<Key> apply(std::size_t gen, const Key& x) const override {
    const auto& [u, v] = rules_[gen];
    auto [w, p] = decode(x);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (at(w, p, i) != u[i]) return std::nullopt;
    if (u.size() <= w.size()) return encode(v + w.substr(u.size()), p);
    const std::size_t t = (u.size() - w.size()) % p.size();
    return encode(v, p.substr(t) + p.substr(0, t));
  }

  Key parse_point(const nlohmann::json& j) const override {
    std::string s = get_string(j, "custom point");
    auto open = s.find('('), close = s.find(')');
    if (open == std::string::npos || close != s.size() - 1 || close == open + 1)
      throw Error(Errc::parse_error, "custom point must look like \"w(p)\"");
    std::string w = s.substr(0, open), p = s.substr(open + 1, close - open - 1);
    check_word(w);
    check_word(p);
    return encode(w, p);
  }

  nlohmann::json point_json(const Key& x) const override {
    auto [w, p] = decode(x);
    return w + "(" + p + ")";
  }

  // State {c, w...}: the current point is w·σ^c(y).
  Key transport_origin() const override { return Key{0}; }
  std::optional<TransportStep> transport(const Key& x, std::size_t gen, const Key& state) const override {
    const auto& [u, v] = rules_[gen];
    auto [xw, xp] = decode(x);
    std::int64_t c = state[0];
    std::string w;
    for (std::size_t i = 1; i < state.size(); ++i) w += static_cast<char>(state[i]);
    TransportStep step;
    while (w.size() < u.size()) {
      step.reads.push_back(Key{c});
      w += at(xw, xp, static_cast<std::size_t>(c++));
    }
    if (w.compare(0, u.size(), u) != 0) return std::nullopt;
    w = v + w.substr(u.size());
    while (c > 0 && !w.empty() && w.back() == at(xw, xp, static_cast<std::size_t>(c - 1))) {
      w.pop_back();
      --c;
    }
    step.state = {c};
    for (char ch : w) step.state.push_back(ch);
    return step;
  }

  bool agrees(const Key& x, const Key& y, const std::vector<Key>& reads) const override {
    auto [xw, xp] = decode(x);
    auto [yw, yp] = decode(y);
    return std::all_of(reads.begin(), reads.end(), [&](const Key& r) {
      auto i = static_cast<std::size_t>(r[0]);
      return at(xw, xp, i) == at(yw, yp, i);
    });
  }

  nlohmann::json neighborhood_json(const Key& x, const std::vector<Key>& reads) const override {
    if (reads.empty()) return {{"type", "everything"}};
    std::int64_t len = 0;
    for (const Key& r : reads) len = std::max(len, r[0] + 1);
    auto [w, p] = decode(x);
    std::string prefix;
    for (std::int64_t i = 0; i < len; ++i) prefix += at(w, p, static_cast<std::size_t>(i));
    return {{"type", "prefix"}, {"length", len}, {"prefix", prefix}};
  }

  std::optional<Key> cell(const Key& x, std::size_t depth) const override {
    auto [w, p] = decode(x);
    Key out;
    for (std::size_t i = 0; i < depth; ++i) out.push_back(at(w, p, i));
    return out;
  }

  nlohmann::json cell_json(const Key& cell, std::size_t) const override {
    std::string s;
    for (std::int64_t c : cell) s += static_cast<char>(c);
    return s;
  }

 protected:
  std::optional<std::function<bool(const Key&)>> kind_predicate(const nlohmann::json& j) const override {
    if (!j.contains("prefix")) return std::nullopt;
    std::string u = get_string(j.at("prefix"), "prefix");
    return [this, u](const Key& k) {
      auto [w, p] = decode(k);
      for (std::size_t i = 0; i < u.size(); ++i)
        if (at(w, p, i) != u[i]) return false;
      return true;
    };
  }

 private:
  void check_word(const std::string& w) const {
    for (char c : w)
      if (alphabet_.find(c) == std::string::npos)
        throw Error(Errc::invalid_argument, std::string("letter '") + c + "' is not in the alphabet");
  }

  static char at(const std::string& w, const std::string& p, std::size_t i) {
    return i < w.size() ? w[i] : p[(i - w.size()) % p.size()];
  }

  static Key encode(std::string w, std::string p) {
    p.resize(primitive_period(p));
    while (!w.empty() && w.back() == p.back()) {
      w.pop_back();
      p = p.back() + p.substr(0, p.size() - 1);
    }
    Key k{static_cast<std::int64_t>(w.size())};
    for (char c : w) k.push_back(c);
    for (char c : p) k.push_back(c);
    return k;
  }

  static std::pair<std::string, std::string> decode(const Key& k) {
    const auto n = static_cast<std::size_t>(k[0]);
    std::string w, p;
    for (std::size_t i = 1; i <= n; ++i) w += static_cast<char>(k[i]);
    for (std::size_t i = n + 1; i < k.size(); ++i) p += static_cast<char>(k[i]);
    return {w, p};
  }

  nlohmann::json params_;
  std::string alphabet_;
  std::vector<std::pair<std::string, std::string>> rules_;  // per generator
};

// ---------------------------------------------------------------- doubling

class DoublePseudogroup : public Pseudogroup {
 public:
  explicit DoublePseudogroup(PseudogroupPtr base) : base_(std::move(base)) {
    for (const GeneratorInfo& g : base_->generators()) add_involution("g[" + g.name + "]");
    add_involution("g[id]");
    for (Key k : base_->basepoints()) {
      k.push_back(0);
      basepoints_.push_back(std::move(k));
    }
  }

  std::string kind() const override { return "double"; }
  std::string describe() const override { return "doubling of " + base_->describe(); }
  nlohmann::json params() const override { return {{"base", to_json(*base_)}}; }

  std::optional<Key> apply(std::size_t gen, const Key& w) const override {
    Key z(w.begin(), w.end() - 1);
    const std::int64_t layer = w.back();
    std::optional<Key> moved;
    if (gen == base_->generators().size()) {
      moved = z;
    } else if (layer == 0) {
      moved = base_->apply(gen, z);
    } else {
      moved = base_->apply(base_->generators()[gen].inverse, z);
    }
    Key out = moved ? *moved : z;
    out.push_back(moved ? 1 - layer : layer);
    return out;
  }

  Key parse_point(const nlohmann::json& j) const override {
    if (!j.is_object() || !j.contains("point"))
      throw Error(Errc::parse_error, "doubled point must be {\"point\", \"layer\"}");
    Key k = base_->parse_point(j.at("point"));
    std::int64_t layer = get_int(j.value("layer", nlohmann::json(0)), "layer");
    if (layer != 0 && layer != 1) throw Error(Errc::parse_error, "layer must be 0 or 1");
    k.push_back(layer);
    return k;
  }

  nlohmann::json point_json(const Key& w) const override {
    Key z(w.begin(), w.end() - 1);
    return {{"point", base_->point_json(z)}, {"layer", w.back()}};
  }

  std::optional<Key> cell(const Key& w, std::size_t depth) const override {
    Key z(w.begin(), w.end() - 1);
    auto c = base_->cell(z, depth);
    if (c) c->push_back(w.back());
    return c;
  }

 private:
  PseudogroupPtr base_;
};

}  // namespace

std::shared_ptr<Pseudogroup> make_custom(const nlohmann::json& params) {
  if (!params.contains("alphabet") || !params.contains("rules"))
    throw Error(Errc::parse_error, "custom pseudogroup needs \"alphabet\" and \"rules\"");
  return std::make_shared<CustomPseudogroup>(params);
}

std::shared_ptr<Pseudogroup> make_double(PseudogroupPtr base) {
  return std::make_shared<DoublePseudogroup>(std::move(base));
}

}  // namespace coarse
