#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vair/geometry.hpp"
#include "vair/density_grid.hpp"
#include "vair/mesh.hpp"

namespace vair {

// File-level failure with the offending path (and entry, where known) in the
// message.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// PLY point clouds: ascii and binary_little_endian, x/y/z float32, optional
// red/green/blue uchar. Unknown properties and elements are skipped. If
// pillar_ids is non-null and the file has an int pillar_id property, it is
// filled alongside the points.
PointCloud load_ply(const std::string& path, std::vector<int>* pillar_ids = nullptr);
void save_ply(const std::string& path, const PointCloud& cloud, bool binary = true,
              const std::vector<int>* pillar_ids = nullptr);

// Density grid container: magic "VGRD", version byte 1, dims as u32 LE,
// bounds as six f64 LE (min xyz, max xyz), values f32 LE x-fastest.
DensityGrid load_grid(const std::string& path);
void save_grid(const std::string& path, const DensityGrid& grid);

// Mesh export.
void save_mesh_ply(const std::string& path, const TriMesh& mesh);
void save_mesh_obj(const std::string& path, const TriMesh& mesh);

// Single-channel 8-bit image.
struct Image8 {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, pixels[y*width + x]

  std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
};

Image8 load_gray_png(const std::string& path);
void save_gray_png(const std::string& path, const Image8& img);

// Acoustic ping log row. Extrinsics are joined in from the manifest.
struct PingRow {
  double timestamp = 0;
  int sensor_id = 0;
  double range = 0;
};

// CSV with exact header "timestamp_s,sensor_id,range_m".
std::vector<PingRow> load_ping_csv(const std::string& path);
void save_ping_csv(const std::string& path, const std::vector<PingRow>& rows);

}  // namespace vair
