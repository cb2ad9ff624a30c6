#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vair/density_grid.hpp"
#include "vair/geometry.hpp"

namespace vair {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  bool empty() const { return faces.empty(); }
  double surface_area() const;
  // Signed volume via the divergence theorem; meaningful for closed meshes
  // with consistent winding.
  double signed_volume() const;
  Box3 bbox() const;
};

// Iso-surface of the grid at the given level, linear edge interpolation,
// vertices in world coordinates. Shared vertices along cell edges.
TriMesh marching_cubes(const DensityGrid& grid, double iso);

// Area-weighted uniform sampling helpers live in synthgen; kept here are the
// purely geometric mesh utilities.
}  // namespace vair
