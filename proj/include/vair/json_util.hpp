#pragma once

#include <json.hpp>

#include "vair/geometry.hpp"

namespace vair {

inline nlohmann::json to_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}

inline Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json to_json(const Box3& b) {
  return nlohmann::json{{"min", to_json(b.min)}, {"max", to_json(b.max)}};
}

inline Box3 box3_from_json(const nlohmann::json& j) {
  return {vec3_from_json(j.at("min")), vec3_from_json(j.at("max"))};
}

}  // namespace vair
