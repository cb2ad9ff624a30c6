#pragma once

#include <vector>

#include "vair/geometry.hpp"

namespace vair {

// One density-field observation: target density at a world point.
struct DensitySample {
  Vec3 point;
  double density = 0;
};

using DensitySampleSet = std::vector<DensitySample>;

}  // namespace vair
