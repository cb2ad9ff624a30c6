#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vair/geometry.hpp"
#include "vair/ingest.hpp"
#include "vair/synthgen.hpp"

namespace vair {

// Planar rectangle orthogonal to one coordinate axis. (u, v) are the two
// remaining axes in (x, y, z) order with `axis` removed.
struct AxisRect {
  int axis = 0;      // 0: plane x=level, 1: y=level, 2: z=level
  double level = 0;
  double u_min = 0, u_max = 0;
  double v_min = 0, v_max = 0;
};

struct AnalyticScene {
  std::vector<AxisRect> walls;   // opaque
  std::vector<GlassSpec> glass;  // transparent (acoustic returns, no depth)
  Box3 bounds;
};

// walls of an axis-aligned box room, normals pointing inward is implied by use
std::vector<AxisRect> box_room_walls(const Box3& box);

struct RayHit {
  double t = 0;        // ray parameter = range for unit directions
  bool glass = false;  // nearest rectangle is a glass pane
};

// Nearest rectangle (opaque or glass) along the ray; opaque wins exact ties.
std::optional<RayHit> raycast(const AnalyticScene& scene, const Ray& ray);

struct SimConfig {
  std::uint64_t seed = 1;
  double frame_hz = 30.0;
  double ping_hz = 10.0;
  CameraIntrinsics intrinsics{40.0, 40.0, 32.0, 24.0, 64, 48};
  int scene_points = 20000;   // depth-derived cloud size (opaque only)
  RangeGate gate;
  std::vector<double> sensor_yaws_deg{0.0, 90.0, -90.0};
};

// Renders the capture a camera + acoustic rig would record along the
// trajectory and writes it in the ingest manifest layout under out_dir:
// manifest.json, masks/frame_NNNN.png, pings.csv, scene.ply. Returns the
// manifest path.
std::string simulate_capture(const AnalyticScene& scene,
                             const std::vector<TimedPose>& trajectory,
                             const SimConfig& cfg, const std::string& out_dir);

// Raycastable view of a generated scene: room walls + clutter faces opaque,
// panes transparent.
AnalyticScene analytic_scene(const GeneratedScene& scene);

// Linear camera sweep parallel to the first pane at the given standoff,
// optical axis facing the pane, sensor yaws in the horizontal plane. Two
// knots; pose_at interpolation fills the rest.
std::vector<TimedPose> pane_sweep_trajectory(const GeneratedScene& scene,
                                             double standoff = 2.0,
                                             double speed = 0.1,
                                             double overhang = 0.5);

}  // namespace vair
