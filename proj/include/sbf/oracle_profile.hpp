#pragma once

#include <cstdint>

namespace sbf {

// Error characteristics of an oracle against a particular key set and query
// stream.
struct OracleProfile {
  double f_p = 0.0;  // fraction of non-keys scoring >= tau
  double f_n = 0.0;  // fraction of keys scoring < tau
  std::uint64_t size_bits = 0;
};

}  // namespace sbf
