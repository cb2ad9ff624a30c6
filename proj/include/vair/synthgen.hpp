#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vair/geometry.hpp"
#include "vair/mesh.hpp"
#include "vair/rng.hpp"
#include "vair/samples.hpp"

namespace vair {

struct RoomSpec {
  std::uint64_t seed = 0;
  double width = 6, depth = 6;   // footprint, meters
  double wall_height = 2.6;
  int clutter_count = 0;         // axis-aligned boxes on the floor
};

enum class GlassKind { kFullPane, kHalfPane, kWindow };

const char* glass_kind_name(GlassKind k);
GlassKind glass_kind_from_name(const std::string& name);

// Vertical rectangle embedded in a wall plane. width is the horizontal
// extent, height the vertical one.
struct GlassSpec {
  GlassKind kind = GlassKind::kFullPane;
  Vec3 center;
  double width = 1, height = 1;
  Vec3 wall_normal;  // unit, +-x or +-y

  // horizontal in-plane axis
  Vec3 u_axis() const { return Vec3{0, 0, 1}.cross(wall_normal); }
  bool contains(const Vec3& p, double margin) const {
    Vec3 d = p - center;
    return std::abs(d.dot(wall_normal)) <= margin &&
           std::abs(d.dot(u_axis())) <= width / 2 &&
           std::abs(d.z) <= height / 2;
  }
};

struct SynthConfig {
  Vec3 crop_size{3, 3, 4};
  int points_per_scene = 10000;  // surface samples per crop
  double free_ratio = 1.0;       // free-space samples as a fraction of surface
  int glass_min = 1, glass_max = 3;
  double carve_margin = 0.05;    // slab half-thickness perpendicular to wall
  double clearance = 0.05;       // free-space minimum distance to surfaces
  // transparent-set negatives (density 0), as fractions of |cutout points|:
  // zeros keep the transparent decoder from collapsing to a constant
  double trans_neg_free_ratio = 1.0;
  double trans_neg_surf_ratio = 1.0;
  double sigma_max = 100.0;
  // room randomization ranges
  double room_min = 4.0, room_max = 8.0;
  double height_min = 2.4, height_max = 3.0;
  int clutter_min = 2, clutter_max = 5;
};

// Full-room view of one generated scene, world coordinates. The crop origin
// anchors the canonical training box on the first glass pane.
struct GeneratedScene {
  TriMesh room;
  std::vector<GlassSpec> glass;
  std::vector<Box3> clutter;  // the boxes baked into room
  Vec3 crop_origin;
  Box3 room_box;
  std::uint64_t seed = 0;
};

// Paired supervision for one scene, translated into the canonical crop box
// [0, crop_size]. scene_samples: surface points at sigma_max then free-space
// points at 0. trans_samples: cutout points at sigma_max then negatives at 0.
struct ScenePair {
  DensitySampleSet scene_samples;
  DensitySampleSet trans_samples;
  Box3 bounds;
  std::size_t surface_count = 0;  // scene_samples[0..surface_count) are surface
  std::size_t cutout_count = 0;   // trans_samples[0..cutout_count) are cutouts
  Vec3 origin;                    // world offset of the canonical box
  std::vector<GlassSpec> glass;   // canonical coordinates
  std::uint64_t seed = 0;
};

// Box room (floor, ceiling, 4 walls) plus clutter boxes; deterministic in
// spec.seed.
TriMesh generate_room(const RoomSpec& spec);

// The clutter boxes generate_room(spec) bakes into the mesh, same draws.
std::vector<Box3> clutter_boxes(const RoomSpec& spec);

// Mesh clipped to the axis-aligned crop box at origin. Throws on empty
// intersection.
TriMesh crop_scene(const TriMesh& mesh, const Vec3& origin,
                   const Vec3& crop_size = {3, 3, 4});

// Area-weighted uniform surface sampling.
PointCloud sample_surface(const TriMesh& mesh, int n, Rng& rng);

struct CarveResult {
  PointCloud surface;  // X_s: everything outside the glass slabs
  PointCloud cutout;   // X_t: points within margin of a glass rectangle
};

// Partition of the cloud into opaque surface and glass cutout points. Throws
// when a spec's plane holds no cloud points at all (rectangle off any wall).
CarveResult carve_glass(const PointCloud& cloud,
                        const std::vector<GlassSpec>& specs, double margin);

// n points uniform in bounds, each at least `clearance` from every surface
// point. Throws after a draw budget of 100*n rejections.
PointCloud sample_free_space(const Box3& bounds, int n,
                             const PointCloud& surfaces, double clearance,
                             Rng& rng);

GeneratedScene generate_scene(std::uint64_t master_seed, std::uint64_t index,
                              const SynthConfig& cfg);

ScenePair make_pair(const GeneratedScene& scene, const SynthConfig& cfg);

std::vector<ScenePair> make_dataset(std::uint64_t master_seed, int count,
                                    const SynthConfig& cfg);

// On-disk layout: <dir>/scene_NNNN/{scene.ply, trans.ply, free.ply,
// meta.json} plus a top-level dataset.json index.
void write_dataset(const std::string& dir, const std::vector<ScenePair>& pairs,
                   std::uint64_t master_seed, const SynthConfig& cfg);
std::vector<ScenePair> load_dataset(const std::string& dir);

}  // namespace vair
