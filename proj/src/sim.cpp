#include "vair/sim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "vair/io.hpp"
#include "vair/rng.hpp"

namespace vair {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

// (u, v) axes complementary to rect.axis, in (x, y, z) order
void rect_axes(int axis, int& ua, int& va) {
  ua = axis == 0 ? 1 : 0;
  va = axis == 2 ? 1 : 2;
}

std::optional<double> hit_rect(const AxisRect& r, const Ray& ray) {
  double d = ray.direction[r.axis];
  if (std::abs(d) < 1e-12) return std::nullopt;
  double t = (r.level - ray.origin[r.axis]) / d;
  if (t <= 1e-9) return std::nullopt;
  int ua, va;
  rect_axes(r.axis, ua, va);
  double u = ray.origin[ua] + t * ray.direction[ua];
  double v = ray.origin[va] + t * ray.direction[va];
  if (u < r.u_min || u > r.u_max || v < r.v_min || v > r.v_max)
    return std::nullopt;
  return t;
}

AxisRect glass_rect(const GlassSpec& g) {
  AxisRect r;
  r.axis = std::abs(g.wall_normal.x) > 0.5 ? 0 : 1;
  r.level = g.center[r.axis];
  int ua, va;
  rect_axes(r.axis, ua, va);
  r.u_min = g.center[ua] - g.width / 2;
  r.u_max = g.center[ua] + g.width / 2;
  r.v_min = g.center.z - g.height / 2;
  r.v_max = g.center.z + g.height / 2;
  return r;
}

double rect_area(const AxisRect& r) {
  return (r.u_max - r.u_min) * (r.v_max - r.v_min);
}

Vec3 rect_point(const AxisRect& r, double u, double v) {
  Vec3 p;
  int ua, va;
  rect_axes(r.axis, ua, va);
  double c[3];
  c[r.axis] = r.level;
  c[ua] = u;
  c[va] = v;
  p = {c[0], c[1], c[2]};
  return p;
}

json pose_json(const PoseSE3& p) {
  json a = json::array();
  for (double v : p.to_mat4()) a.push_back(v);
  return a;
}

}  // namespace

std::vector<AxisRect> box_room_walls(const Box3& box) {
  Vec3 lo = box.min, hi = box.max;
  return {
      {0, lo.x, lo.y, hi.y, lo.z, hi.z}, {0, hi.x, lo.y, hi.y, lo.z, hi.z},
      {1, lo.y, lo.x, hi.x, lo.z, hi.z}, {1, hi.y, lo.x, hi.x, lo.z, hi.z},
      {2, lo.z, lo.x, hi.x, lo.y, hi.y}, {2, hi.z, lo.x, hi.x, lo.y, hi.y},
  };
}

std::optional<RayHit> raycast(const AnalyticScene& scene, const Ray& ray) {
  std::optional<RayHit> best;
  for (const auto& w : scene.walls)
    if (auto t = hit_rect(w, ray); t && (!best || *t < best->t))
      best = RayHit{*t, false};
  for (const auto& g : scene.glass)
    if (auto t = hit_rect(glass_rect(g), ray); t && (!best || *t < best->t))
      best = RayHit{*t, true};
  return best;
}

std::string simulate_capture(const AnalyticScene& scene,
                             const std::vector<TimedPose>& trajectory,
                             const SimConfig& cfg, const std::string& out_dir) {
  if (trajectory.empty())
    throw std::invalid_argument("simulate_capture: empty trajectory");
  cfg.intrinsics.validate();

  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "masks");
  double t0 = trajectory.front().timestamp;
  double t1 = trajectory.back().timestamp;

  json manifest;
  manifest["frames"] = json::array();
  manifest["pings"] = "pings.csv";
  manifest["scene_cloud"] = "scene.ply";

  // camera frames with rendered glass masks
  long n_frames = long((t1 - t0) * cfg.frame_hz + 1e-9) + 1;
  for (long i = 0; i < n_frames; ++i) {
    double t = t0 + double(i) / cfg.frame_hz;
    PoseSE3 pose = pose_at(trajectory, t);

    Image8 mask;
    mask.width = cfg.intrinsics.width;
    mask.height = cfg.intrinsics.height;
    mask.pixels.assign(std::size_t(mask.width) * mask.height, 0);
    for (int v = 0; v < mask.height; ++v)
      for (int u = 0; u < mask.width; ++u) {
        Ray ray = pixel_to_ray(cfg.intrinsics, pose, u, v);
        auto hit = raycast(scene, ray);
        if (hit && hit->glass)
          mask.pixels[std::size_t(v) * mask.width + u] = 255;
      }
    char name[48];
    std::snprintf(name, sizeof(name), "masks/frame_%04ld.png", i);
    save_gray_png((fs::path(out_dir) / name).string(), mask);

    json frame;
    frame["t"] = t;
    frame["pose"] = pose_json(pose);
    frame["intrinsics"] = json{{"fx", cfg.intrinsics.fx}, {"fy", cfg.intrinsics.fy},
                               {"cx", cfg.intrinsics.cx}, {"cy", cfg.intrinsics.cy},
                               {"w", cfg.intrinsics.width}, {"h", cfg.intrinsics.height}};
    frame["mask"] = name;
    manifest["frames"].push_back(frame);
  }

  // acoustic rig: one forward ray per sensor per ping tick, range-gated
  std::vector<PoseSE3> extrinsics;
  for (double yaw_deg : cfg.sensor_yaws_deg)
    extrinsics.push_back({Mat3::rotation_y(yaw_deg * kPi / 180.0), {0, 0, 0}});

  std::vector<PingRow> rows;
  long n_pings = long((t1 - t0) * cfg.ping_hz + 1e-9) + 1;
  for (long i = 0; i < n_pings; ++i) {
    double t = t0 + double(i) / cfg.ping_hz;
    PoseSE3 body = pose_at(trajectory, t);
    for (std::size_t s = 0; s < extrinsics.size(); ++s) {
      PoseSE3 sensor = body.compose(extrinsics[s]);
      Ray ray{sensor.translation, sensor.rotation * Vec3{0, 0, 1}};
      auto hit = raycast(scene, ray);
      if (hit && cfg.gate.accepts(hit->t))
        rows.push_back({t, int(s), hit->t});
    }
  }
  save_ping_csv((fs::path(out_dir) / "pings.csv").string(), rows);

  manifest["extrinsics"] = json::object();
  for (std::size_t s = 0; s < extrinsics.size(); ++s)
    manifest["extrinsics"][std::to_string(s)] = pose_json(extrinsics[s]);

  // depth-derived cloud: area-weighted samples of opaque walls, never glass
  if (scene.walls.empty() && cfg.scene_points > 0)
    throw std::invalid_argument("simulate_capture: no opaque walls to sample");
  double total = 0;
  std::vector<double> cum;
  for (const auto& w : scene.walls) {
    total += rect_area(w);
    cum.push_back(total);
  }
  Rng rng = substream(cfg.seed, "sim-scene");
  PointCloud cloud;
  long budget = 100L * std::max(1, cfg.scene_points);
  while (int(cloud.points.size()) < cfg.scene_points) {
    if (budget-- <= 0)
      throw std::runtime_error(
          "simulate_capture: scene sampling budget exhausted (glass covers the walls?)");
    double r = rng.uniform(0, total);
    std::size_t wi = std::size_t(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    if (wi >= scene.walls.size()) wi = scene.walls.size() - 1;
    const AxisRect& w = scene.walls[wi];
    Vec3 p = rect_point(w, rng.uniform(w.u_min, w.u_max), rng.uniform(w.v_min, w.v_max));
    bool glassy = false;
    for (const auto& g : scene.glass)
      if (g.contains(p, 1e-6)) {
        glassy = true;
        break;
      }
    if (!glassy) cloud.points.push_back(p);
  }
  save_ply((fs::path(out_dir) / "scene.ply").string(), cloud);

  manifest["trajectory"] = json::array();
  for (const auto& tp : trajectory)
    manifest["trajectory"].push_back(json{{"t", tp.timestamp}, {"pose", pose_json(tp.pose)}});

  std::string path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream out(path);
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("simulate_capture: cannot write " + path);
  return path;
}

namespace {

// Wall minus a coplanar pane opening: up to four rectangles (left, right,
// bottom, top strips). Different plane leaves the wall intact.
std::vector<AxisRect> subtract_pane(const AxisRect& r, const GlassSpec& g) {
  int axis = std::abs(g.wall_normal.x) > 0.5 ? 0 : 1;
  double level = axis == 0 ? g.center.x : g.center.y;
  if (r.axis != axis || std::abs(r.level - level) > 1e-9) return {r};

  double cu = axis == 0 ? g.center.y : g.center.x;
  double u0 = std::max(cu - g.width / 2, r.u_min);
  double u1 = std::min(cu + g.width / 2, r.u_max);
  double v0 = std::max(g.center.z - g.height / 2, r.v_min);
  double v1 = std::min(g.center.z + g.height / 2, r.v_max);
  if (u0 >= u1 || v0 >= v1) return {r};

  std::vector<AxisRect> out;
  auto push = [&](double a0, double a1, double b0, double b1) {
    if (a1 - a0 > 1e-12 && b1 - b0 > 1e-12)
      out.push_back({r.axis, r.level, a0, a1, b0, b1});
  };
  push(r.u_min, u0, r.v_min, r.v_max);
  push(u1, r.u_max, r.v_min, r.v_max);
  push(u0, u1, r.v_min, v0);
  push(u0, u1, v1, r.v_max);
  return out;
}

}  // namespace

AnalyticScene analytic_scene(const GeneratedScene& scene) {
  AnalyticScene out;
  out.bounds = scene.room_box;
  std::vector<AxisRect> raw = box_room_walls(scene.room_box);
  for (const Box3& b : scene.clutter) {
    std::vector<AxisRect> faces = box_room_walls(b);
    raw.insert(raw.end(), faces.begin(), faces.end());
  }
  // panes sit in wall openings: cut each one out of its wall so glass is
  // visible through the hole and depth never samples it
  for (const AxisRect& r : raw) {
    std::vector<AxisRect> parts{r};
    for (const GlassSpec& g : scene.glass) {
      std::vector<AxisRect> next;
      for (const AxisRect& p : parts)
        for (AxisRect& q : subtract_pane(p, g)) next.push_back(q);
      parts = std::move(next);
    }
    out.walls.insert(out.walls.end(), parts.begin(), parts.end());
  }
  out.glass = scene.glass;
  return out;
}

std::vector<TimedPose> pane_sweep_trajectory(const GeneratedScene& scene,
                                             double standoff, double speed,
                                             double overhang) {
  if (scene.glass.empty())
    throw std::invalid_argument("pane_sweep_trajectory: scene has no glass");
  if (standoff <= 0 || speed <= 0)
    throw std::invalid_argument(
        "pane_sweep_trajectory: standoff and speed must be positive");
  const GlassSpec& g = scene.glass.front();
  Vec3 u = g.u_axis();
  Vec3 f = g.wall_normal * -1.0;  // optical axis points at the pane
  Vec3 d{0, 0, -1};               // camera y down, world z up
  Vec3 r = d.cross(f);

  PoseSE3 pose;
  pose.rotation = Mat3::from_rows({r.x, d.x, f.x}, {r.y, d.y, f.y},
                                  {r.z, d.z, f.z});

  double half = g.width / 2 + overhang;
  Vec3 eye = g.center + g.wall_normal * standoff;
  std::vector<TimedPose> traj(2);
  traj[0].timestamp = 0.0;
  traj[0].pose = pose;
  traj[0].pose.translation = eye - u * half;
  traj[1].timestamp = 2.0 * half / speed;
  traj[1].pose = pose;
  traj[1].pose.translation = eye + u * half;
  return traj;
}

}  // namespace vair
