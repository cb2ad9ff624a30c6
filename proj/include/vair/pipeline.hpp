#pragma once

#include <cstdint>

#include "vair/aspp.hpp"
#include "vair/ingest.hpp"
#include "vair/samples.hpp"

namespace vair {

struct ObservationConfig {
  double epsilon = 0.15;        // pillar support gate, meters in xy
  double t_max = 10.0;          // ray parameter cutoff for pillar support
  double spacing = 0.05;        // vertical fill step along pillars
  int stride = 8;               // mask pixel stride for semantic rays
  RangeGate gate;
  bool beam_free = true;        // zero-density points along accepted pings
  double beam_spacing = 0.1;
  double beam_start = 0.05;
  double beam_stop_frac = 0.9;  // stop short of the return by this fraction
  double clearance = 0.05;      // scene free-space clearance
  double sigma_max = 100.0;
  std::uint64_t seed = 1;
  Vec3 origin;                  // world-to-canonical translation
  Box3 bounds{{0, 0, 0}, {3, 3, 4}};
};

struct Observations {
  DensitySampleSet scene_obs;  // canonical coordinates, as are all members
  DensitySampleSet trans_obs;
  PointCloud apc;
  AsppPoints aspp;
};

// Assembles the two observation sets the latent optimizer consumes from one
// ingested capture: acoustic returns and their pillar fill at full density,
// the depth-derived cloud at full density plus clearance-checked free space
// at zero, and (optionally) zero-density points along each accepted beam.
// Observation points falling outside bounds after translation are dropped;
// apc and aspp keep every point.
Observations build_observations(const Capture& capture,
                                const ObservationConfig& cfg);

// Crop anchor guess when none is given: xy centers the box on the acoustic
// evidence, z puts the floor (5th percentile of scene-cloud heights) half a
// meter above the box bottom.
Vec3 auto_origin(const PointCloud& acoustic_world,
                 const PointCloud& scene_world, const Box3& bounds);

}  // namespace vair
