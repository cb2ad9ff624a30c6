#include "vair/pipeline.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "vair/log.hpp"
#include "vair/rng.hpp"
#include "vair/synthgen.hpp"

namespace vair {

Observations build_observations(const Capture& cap,
                                const ObservationConfig& cfg) {
  Observations out;

  AcousticPointCloud apc =
      build_apc(cap.frames, cap.pings, cap.trajectory, cfg.gate);
  SemanticRaySet rays = glass_rays(cap.frames, cap.masks, cfg.stride);
  std::vector<Pillar> pillars = build_pillars(apc, rays, cfg.epsilon, cfg.t_max);
  out.aspp = sample_aspp(pillars, cfg.spacing);

  for (Vec3& p : out.aspp.points.points) p -= cfg.origin;
  out.apc = apc.points;
  for (Vec3& p : out.apc.points) p -= cfg.origin;

  for (const Vec3& p : out.apc.points)
    if (cfg.bounds.contains(p)) out.trans_obs.push_back({p, cfg.sigma_max});
  for (const Vec3& p : out.aspp.points.points)
    if (cfg.bounds.contains(p)) out.trans_obs.push_back({p, cfg.sigma_max});

  if (cfg.beam_free) {
    std::vector<TimedPose> traj = cap.trajectory;
    if (traj.empty()) {
      traj.reserve(cap.frames.size());
      for (const auto& f : cap.frames) traj.push_back({f.timestamp, f.pose});
    }
    for (std::size_t i = 0; i < apc.ping_index.size(); ++i) {
      const AcousticPing& ping = cap.pings[apc.ping_index[i]];
      PoseSE3 sensor = pose_at(traj, ping.timestamp).compose(ping.extrinsic);
      Vec3 o = sensor.translation;
      Vec3 dir = sensor.rotation * Vec3{0, 0, 1};
      double stop = cfg.beam_stop_frac * ping.range;
      for (double t = cfg.beam_start; t <= stop + 1e-12; t += cfg.beam_spacing) {
        Vec3 p = o + dir * t - cfg.origin;
        if (cfg.bounds.contains(p)) out.trans_obs.push_back({p, 0.0});
      }
    }
  }

  PointCloud scene_canon;
  for (const Vec3& p : cap.scene_cloud.points) {
    Vec3 q = p - cfg.origin;
    if (cfg.bounds.contains(q)) {
      scene_canon.points.push_back(q);
      out.scene_obs.push_back({q, cfg.sigma_max});
    }
  }
  if (scene_canon.points.empty()) {
    log_warn("build_observations: no scene-cloud points inside bounds");
  } else {
    Rng rng = substream(cfg.seed, "infer-free");
    PointCloud free =
        sample_free_space(cfg.bounds, int(scene_canon.points.size()),
                          scene_canon, cfg.clearance, rng);
    for (const Vec3& p : free.points) out.scene_obs.push_back({p, 0.0});
  }
  return out;
}

Vec3 auto_origin(const PointCloud& acoustic_world,
                 const PointCloud& scene_world, const Box3& bounds) {
  if (acoustic_world.points.empty())
    throw std::invalid_argument("auto_origin: no acoustic points");
  if (scene_world.points.empty())
    throw std::invalid_argument("auto_origin: no scene points");

  Vec3 c{0, 0, 0};
  for (const Vec3& p : acoustic_world.points) c += p;
  c = c / double(acoustic_world.points.size());

  std::vector<double> zs;
  zs.reserve(scene_world.points.size());
  for (const Vec3& p : scene_world.points) zs.push_back(p.z);
  std::size_t k = zs.size() / 20;
  std::nth_element(zs.begin(), zs.begin() + long(k), zs.end());
  double floor_z = zs[k];

  Vec3 mid = bounds.center();
  return {c.x - mid.x, c.y - mid.y, floor_z - bounds.min.z - 0.5};
}

}  // namespace vair
