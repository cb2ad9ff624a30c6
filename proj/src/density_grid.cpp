#include "vair/density_grid.hpp"

#include <algorithm>
#include <cmath>

namespace vair {

TrilinearTaps trilinear_taps(const DensityGrid& grid, const Vec3& p) {
  Vec3 s = grid.bounds.size();
  // normalized grid coordinates in node units
  double gx = grid.nx > 1 ? (p.x - grid.bounds.min.x) / s.x * (grid.nx - 1) : 0.0;
  double gy = grid.ny > 1 ? (p.y - grid.bounds.min.y) / s.y * (grid.ny - 1) : 0.0;
  double gz = grid.nz > 1 ? (p.z - grid.bounds.min.z) / s.z * (grid.nz - 1) : 0.0;
  gx = std::clamp(gx, 0.0, double(grid.nx - 1));
  gy = std::clamp(gy, 0.0, double(grid.ny - 1));
  gz = std::clamp(gz, 0.0, double(grid.nz - 1));

  int i0 = std::min(int(gx), grid.nx - 2 >= 0 ? grid.nx - 2 : 0);
  int j0 = std::min(int(gy), grid.ny - 2 >= 0 ? grid.ny - 2 : 0);
  int k0 = std::min(int(gz), grid.nz - 2 >= 0 ? grid.nz - 2 : 0);
  i0 = std::max(i0, 0);
  j0 = std::max(j0, 0);
  k0 = std::max(k0, 0);
  int i1 = std::min(i0 + 1, grid.nx - 1);
  int j1 = std::min(j0 + 1, grid.ny - 1);
  int k1 = std::min(k0 + 1, grid.nz - 1);

  double tx = gx - i0, ty = gy - j0, tz = gz - k0;

  TrilinearTaps taps;
  int corner = 0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        taps.index[corner] =
            grid.index(dx ? i1 : i0, dy ? j1 : j0, dz ? k1 : k0);
        taps.weight[corner] = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) *
                              (dz ? tz : 1 - tz);
        ++corner;
      }
  return taps;
}

double trilinear_sample(const DensityGrid& grid, const Vec3& p) {
  TrilinearTaps taps = trilinear_taps(grid, p);
  double v = 0;
  for (int c = 0; c < 8; ++c) v += grid.values[taps.index[c]] * taps.weight[c];
  return v;
}

std::size_t VoxelOccupancy::count() const {
  std::size_t n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

PointCloud VoxelOccupancy::center_cloud() const {
  PointCloud out;
  for (int k = 0; k < dim; ++k)
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i)
        if (occupied(i, j, k)) out.points.push_back(voxel_center(i, j, k));
  return out;
}

VoxelOccupancy voxelize(const PointCloud& cloud, int dim, const Box3& bounds) {
  VoxelOccupancy occ(dim, bounds);
  Vec3 s = bounds.size();
  for (const auto& p : cloud.points) {
    if (p.x < bounds.min.x || p.x > bounds.max.x || p.y < bounds.min.y ||
        p.y > bounds.max.y || p.z < bounds.min.z || p.z > bounds.max.z)
      continue;
    // floor puts internal-boundary points in the higher-index voxel
    int i = int(std::floor((p.x - bounds.min.x) / s.x * dim));
    int j = int(std::floor((p.y - bounds.min.y) / s.y * dim));
    int k = int(std::floor((p.z - bounds.min.z) / s.z * dim));
    i = std::min(i, dim - 1);  // exact max face
    j = std::min(j, dim - 1);
    k = std::min(k, dim - 1);
    occ.bits[occ.index(i, j, k)] = 1;
  }
  return occ;
}

}  // namespace vair
