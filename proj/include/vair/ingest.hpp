#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vair/geometry.hpp"
#include "vair/io.hpp"

namespace vair {

struct GlassMask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> bits;  // row-major, nonzero = transparent pixel

  bool at(int x, int y) const { return bits[std::size_t(y) * width + x] != 0; }
};

GlassMask mask_from_image(const Image8& img);
GlassMask load_mask(const std::string& path);

struct FrameRecord {
  double timestamp = 0;
  PoseSE3 pose;  // camera to world
  std::string mask_path;
  CameraIntrinsics intrinsics;
};

struct AcousticPing {
  double timestamp = 0;
  int sensor_id = 0;
  double range = 0;    // meters along the sensor's +z
  PoseSE3 extrinsic;   // sensor to camera
};

struct TimedPose {
  double timestamp = 0;
  PoseSE3 pose;
};

struct AcousticPointCloud {
  PointCloud points;                    // world frame
  std::vector<std::size_t> ping_index;  // source ping per point
  std::size_t rejected = 0;
};

struct RangeGate {
  double min = 0.02;
  double max = 4.0;
  bool accepts(double r) const { return r > min && r <= max; }
};

struct Capture {
  std::vector<FrameRecord> frames;     // sorted by timestamp
  std::vector<GlassMask> masks;        // one per frame, decoded
  std::vector<AcousticPing> pings;     // sorted by timestamp
  PointCloud scene_cloud;              // opaque geometry, world frame
  std::vector<TimedPose> trajectory;   // sorted by timestamp
  std::string root;                    // manifest directory
};

// Parses the capture manifest (JSON) and everything it references. Throws
// ParseError naming the offending entry on any inconsistency.
Capture load_manifest(const std::string& path);

// Pose at time t by linear translation / slerp rotation between bracketing
// trajectory entries; clamps to the endpoints within +-margin seconds and
// throws std::out_of_range beyond that.
PoseSE3 pose_at(const std::vector<TimedPose>& trajectory, double t,
                double margin = 0.2);

// World point of a range return along the sensor's +z axis, or nullopt when
// the range fails the gate.
std::optional<Vec3> ping_to_world(const AcousticPing& ping,
                                  const PoseSE3& camera_pose,
                                  const RangeGate& gate = {});

// One world point per gated ping, posed via trajectory interpolation. Falls
// back on frame poses when the trajectory is empty; both empty is an error.
AcousticPointCloud build_apc(const std::vector<FrameRecord>& frames,
                             const std::vector<AcousticPing>& pings,
                             const std::vector<TimedPose>& trajectory,
                             const RangeGate& gate = {});

}  // namespace vair
