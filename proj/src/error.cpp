#include "coarse/error.hpp"

#include "coarse/rational.hpp"

namespace coarse {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::horizon_exceeded: return "horizon-exceeded";
    case Errc::margin_too_small: return "margin-too-small";
    case Errc::not_a_net: return "not-a-net";
    case Errc::pin_too_far: return "pin-too-far";
    case Errc::distortion_mismatch: return "distortion-mismatch";
    case Errc::equivalence_check_failed: return "equivalence-check-failed";
    case Errc::no_anchor: return "no-anchor";
    case Errc::no_infinite_ray: return "no-infinite-ray";
    case Errc::insufficient_range: return "insufficient-range";
    case Errc::empty_set: return "empty-set";
    case Errc::budget_exhausted: return "budget-exhausted";
    case Errc::mismatched_parameters: return "mismatched-parameters";
    case Errc::unsupported_name: return "unsupported-name";
    case Errc::holonomy_obstruction: return "holonomy-obstruction";
    case Errc::resolution_unreachable: return "resolution-unreachable";
    case Errc::construction_failed: return "construction-failed";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::parse_error: return "parse-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

nlohmann::json Error::to_json() const {
  return {{"error", std::string(errc_name(code_))}, {"message", what()}, {"detail", detail_}};
}

Rational parse_rational(const std::string& text) {
  try {
    std::size_t slash = text.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
      std::int64_t n = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return Rational(n);
    }
    std::string a = text.substr(0, slash), b = text.substr(slash + 1);
    std::int64_t n = std::stoll(a, &used);
    if (used != a.size()) throw std::invalid_argument(text);
    std::int64_t d = std::stoll(b, &used);
    if (used != b.size() || d == 0) throw std::invalid_argument(text);
    return Rational(n, d);
  } catch (const std::logic_error&) {
    throw Error(Errc::parse_error, "not a rational: '" + text + "'");
  }
}

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

}  // namespace coarse
