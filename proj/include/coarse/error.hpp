#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace coarse {

enum class Errc {
  horizon_exceeded,
  margin_too_small,
  not_a_net,
  pin_too_far,
  distortion_mismatch,
  equivalence_check_failed,
  no_anchor,
  no_infinite_ray,
  insufficient_range,
  empty_set,
  budget_exhausted,
  mismatched_parameters,
  unsupported_name,
  holonomy_obstruction,
  resolution_unreachable,
  construction_failed,
  invalid_argument,
  parse_error,
  io_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  // {"error": name, "message": ..., "detail": {...}}
  nlohmann::json to_json() const;

 private:
  Errc code_;
  nlohmann::json detail_;
};

}  // namespace coarse
