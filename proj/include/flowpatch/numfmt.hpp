#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

namespace flowpatch {

// Shortest decimal string that round-trips the double exactly (delegates
// to the JSON serializer's dtoa); keeps CSV output byte-stable.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nlohmann::json(v).dump();
}

}  // namespace flowpatch
