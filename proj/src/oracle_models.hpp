#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <span>

#include "sbf/oracle.hpp"

namespace sbf::detail {

Oracle read_synthetic_oracle(std::span<const std::uint8_t> bytes);
Oracle read_score_oracle(std::span<const std::uint8_t> bytes);

// Threshold travels as binary64; NaN encodes "unset".
inline double encode_tau(std::optional<double> tau) {
  return tau ? *tau : std::numeric_limits<double>::quiet_NaN();
}
inline std::optional<double> decode_tau(double v) {
  if (std::isnan(v)) return std::nullopt;
  return v;
}

}  // namespace sbf::detail
