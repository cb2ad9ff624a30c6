#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vair/geometry.hpp"
#include "vair/ingest.hpp"

namespace vair {

struct SemanticRay {
  Ray ray;             // world frame, unit direction
  std::size_t frame = 0;
  int u = 0, v = 0;    // source pixel
};

struct SemanticRaySet {
  std::vector<SemanticRay> rays;
};

// Camera rays through transparent mask pixels, subsampled on a regular grid
// anchored at pixel (0, 0).
SemanticRaySet glass_rays(const std::vector<FrameRecord>& frames,
                          const std::vector<GlassMask>& masks, int stride = 8);

// Vertical cylinder through one acoustic return, extended to the z-range of
// the semantic rays passing within epsilon of its axis.
struct Pillar {
  double axis_x = 0, axis_y = 0;
  double radius = 0;
  double z_min = 0, z_max = 0;
  std::vector<std::size_t> support;  // indices into the ray set
  std::vector<Vec3> support_points;  // ray points at xy-closest approach
  bool degenerate = false;           // no ray within radius; keeps the raw return
};

// One pillar per APC point, in APC order. A ray supports a pillar when its
// xy-closest approach to the vertical axis is <= epsilon and happens at ray
// parameter t in (0, t_max]. Rays with near-vertical direction are skipped.
std::vector<Pillar> build_pillars(const AcousticPointCloud& apc,
                                  const SemanticRaySet& rays,
                                  double epsilon = 0.15, double t_max = 10.0);

struct AsppPoints {
  PointCloud points;
  std::vector<int> pillar_id;  // source pillar per point
};

// The seed set for inference: every support point of every non-degenerate
// pillar plus vertical fill along each axis from z_min to z_max at the given
// spacing (degenerate pillars contribute exactly their acoustic return).
AsppPoints sample_aspp(const std::vector<Pillar>& pillars,
                       double spacing = 0.05);

// PLY with a per-point int32 pillar_id property.
void save_aspp_ply(const std::string& path, const AsppPoints& pts);

}  // namespace vair
