#pragma once

#include <cstdint>
#include <vector>

#include "vair/geometry.hpp"

namespace vair {

// Dense scalar grid with vertex-centered nodes: node (i,j,k) sits at
// min + (i/(nx-1), j/(ny-1), k/(nz-1)) ⊙ (max-min). Storage is x-fastest.
struct DensityGrid {
  int nx = 0, ny = 0, nz = 0;
  Box3 bounds;
  std::vector<double> values;  // size nx*ny*nz, index x + nx*(y + ny*z)

  DensityGrid() = default;
  DensityGrid(int nx_, int ny_, int nz_, const Box3& b, double fill = 0.0)
      : nx(nx_), ny(ny_), nz(nz_), bounds(b),
        values(static_cast<std::size_t>(nx_) * ny_ * nz_, fill) {
    if (nx < 1 || ny < 1 || nz < 1)
      throw std::invalid_argument("DensityGrid: dims must be positive");
    if (!bounds.valid())
      throw std::invalid_argument("DensityGrid: degenerate bounds");
  }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k);
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }

  Vec3 node_position(int i, int j, int k) const {
    Vec3 s = bounds.size();
    return {bounds.min.x + (nx > 1 ? i * s.x / (nx - 1) : 0.5 * s.x),
            bounds.min.y + (ny > 1 ? j * s.y / (ny - 1) : 0.5 * s.y),
            bounds.min.z + (nz > 1 ? k * s.z / (nz - 1) : 0.5 * s.z)};
  }
};

// The 8 node indices and blend weights trilinear_sample uses at p; weights
// sum to 1. Shared by sampling and by gradient scatter so both agree exactly.
struct TrilinearTaps {
  std::size_t index[8];
  double weight[8];
};
TrilinearTaps trilinear_taps(const DensityGrid& grid, const Vec3& p);

// 8-corner trilinear blend at p. Out-of-bounds queries clamp to the boundary,
// so this is total.
double trilinear_sample(const DensityGrid& grid, const Vec3& p);

// Cubic occupancy grid over an axis-aligned box.
struct VoxelOccupancy {
  int dim = 0;  // dims are (dim, dim, dim)
  Box3 bounds;
  std::vector<std::uint8_t> bits;  // x-fastest, 0/1

  VoxelOccupancy() = default;
  VoxelOccupancy(int n, const Box3& b)
      : dim(n), bounds(b),
        bits(static_cast<std::size_t>(n) * n * n, 0) {
    if (n < 1) throw std::invalid_argument("VoxelOccupancy: dim must be positive");
    if (!bounds.valid())
      throw std::invalid_argument("VoxelOccupancy: degenerate bounds");
  }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dim) * (j + static_cast<std::size_t>(dim) * k);
  }
  bool occupied(int i, int j, int k) const { return bits[index(i, j, k)] != 0; }
  std::size_t count() const;

  // Center of voxel (i,j,k).
  Vec3 voxel_center(int i, int j, int k) const {
    Vec3 s = bounds.size();
    return {bounds.min.x + (i + 0.5) * s.x / dim,
            bounds.min.y + (j + 0.5) * s.y / dim,
            bounds.min.z + (k + 0.5) * s.z / dim};
  }
  PointCloud center_cloud() const;  // centers of occupied voxels
};

// A voxel is occupied iff at least one point falls in it. Points on internal
// voxel boundaries go to the higher-index voxel; points strictly outside
// bounds are ignored (the closed max face lands in the last voxel).
VoxelOccupancy voxelize(const PointCloud& cloud, int dim, const Box3& bounds);

}  // namespace vair
