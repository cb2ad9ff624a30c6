#include "vair/aspp.hpp"

#include <cmath>
#include <stdexcept>

#include "vair/io.hpp"

namespace vair {

SemanticRaySet glass_rays(const std::vector<FrameRecord>& frames,
                          const std::vector<GlassMask>& masks, int stride) {
  if (stride < 1) throw std::invalid_argument("glass_rays: stride must be >= 1");
  if (frames.size() != masks.size())
    throw std::invalid_argument("glass_rays: one mask per frame required");

  SemanticRaySet set;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const GlassMask& m = masks[f];
    for (int v = 0; v < m.height; v += stride)
      for (int u = 0; u < m.width; u += stride) {
        if (!m.at(u, v)) continue;
        set.rays.push_back(
            {pixel_to_ray(frames[f].intrinsics, frames[f].pose, u, v), f, u, v});
      }
  }
  return set;
}

std::vector<Pillar> build_pillars(const AcousticPointCloud& apc,
                                  const SemanticRaySet& rays, double epsilon,
                                  double t_max) {
  if (epsilon <= 0) throw std::invalid_argument("build_pillars: epsilon must be > 0");
  if (t_max <= 0) throw std::invalid_argument("build_pillars: t_max must be > 0");

  std::vector<Pillar> pillars;
  pillars.reserve(apc.points.size());
  for (const Vec3& a : apc.points.points) {
    Pillar p;
    p.axis_x = a.x;
    p.axis_y = a.y;
    p.radius = epsilon;

    for (std::size_t ri = 0; ri < rays.rays.size(); ++ri) {
      const Ray& r = rays.rays[ri].ray;
      double dx = r.direction.x, dy = r.direction.y;
      double d2 = dx * dx + dy * dy;
      if (d2 < 1e-24) continue;  // vertical ray: no xy closest approach
      double t = ((a.x - r.origin.x) * dx + (a.y - r.origin.y) * dy) / d2;
      if (t <= 0 || t > t_max) continue;
      double ex = r.origin.x + t * dx - a.x;
      double ey = r.origin.y + t * dy - a.y;
      if (ex * ex + ey * ey > epsilon * epsilon) continue;
      p.support.push_back(ri);
      p.support_points.push_back(r.origin + r.direction * t);
    }

    if (p.support.empty()) {
      p.degenerate = true;
      p.z_min = p.z_max = a.z;
    } else {
      p.z_min = p.z_max = p.support_points.front().z;
      for (const Vec3& q : p.support_points) {
        p.z_min = std::min(p.z_min, q.z);
        p.z_max = std::max(p.z_max, q.z);
      }
    }
    pillars.push_back(std::move(p));
  }
  return pillars;
}

AsppPoints sample_aspp(const std::vector<Pillar>& pillars, double spacing) {
  if (spacing <= 0) throw std::invalid_argument("sample_aspp: spacing must be > 0");

  AsppPoints out;
  for (std::size_t pi = 0; pi < pillars.size(); ++pi) {
    const Pillar& p = pillars[pi];
    if (!p.degenerate)
      for (const Vec3& q : p.support_points) {
        out.points.points.push_back(q);
        out.pillar_id.push_back(int(pi));
      }
    // axis fill, z_max appended when the progression does not land on it
    double z = p.z_min;
    double last = p.z_min - spacing;
    while (z <= p.z_max + 1e-9) {
      out.points.points.push_back({p.axis_x, p.axis_y, z});
      out.pillar_id.push_back(int(pi));
      last = z;
      z += spacing;
    }
    if (p.z_max - last > 1e-9) {
      out.points.points.push_back({p.axis_x, p.axis_y, p.z_max});
      out.pillar_id.push_back(int(pi));
    }
  }
  return out;
}

void save_aspp_ply(const std::string& path, const AsppPoints& pts) {
  save_ply(path, pts.points, true, &pts.pillar_id);
}

}  // namespace vair
