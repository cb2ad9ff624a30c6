#include "vair/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "vair/log.hpp"

namespace vair {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

PoseSE3 pose_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 16)
    fail(where, "pose must be 16 row-major reals");
  std::array<double, 16> m;
  for (int i = 0; i < 16; ++i) {
    if (!j[i].is_number()) fail(where, "pose entries must be numbers");
    m[std::size_t(i)] = j[i].get<double>();
  }
  PoseSE3 p = PoseSE3::from_mat4(m);
  if (!p.is_valid(1e-6)) fail(where, "pose rotation is not orthonormal");
  return p;
}

CameraIntrinsics intrinsics_from_json(const json& j, const std::string& where) {
  for (const char* key : {"fx", "fy", "cx", "cy", "w", "h"})
    if (!j.contains(key)) fail(where, std::string("intrinsics missing '") + key + "'");
  CameraIntrinsics intr{j["fx"].get<double>(), j["fy"].get<double>(),
                        j["cx"].get<double>(), j["cy"].get<double>(),
                        j["w"].get<int>(),     j["h"].get<int>()};
  try {
    intr.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return intr;
}

}  // namespace

GlassMask mask_from_image(const Image8& img) {
  GlassMask m;
  m.width = img.width;
  m.height = img.height;
  m.bits.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    m.bits[i] = img.pixels[i] != 0 ? 1 : 0;
  return m;
}

GlassMask load_mask(const std::string& path) {
  return mask_from_image(load_gray_png(path));
}

Capture load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open manifest");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path, std::string("invalid JSON: ") + e.what());
  }

  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "frames" && key != "pings" && key != "scene_cloud" &&
        key != "trajectory" && key != "extrinsics")
      fail(path, "unknown manifest key '" + key + "'");
  }
  for (const char* key : {"frames", "pings", "scene_cloud", "trajectory", "extrinsics"})
    if (!j.contains(key)) fail(path, std::string("manifest missing '") + key + "'");

  Capture cap;
  cap.root = fs::path(path).parent_path().string();
  auto resolve = [&](const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p.string() : (fs::path(cap.root) / p).string();
  };

  // extrinsics: sensor_id -> sensor-to-camera pose
  std::map<int, PoseSE3> extrinsics;
  for (const auto& [key, value] : j["extrinsics"].items()) {
    int id = 0;
    try {
      id = std::stoi(key);
    } catch (...) {
      fail(path, "extrinsics key '" + key + "' is not a sensor id");
    }
    extrinsics[id] = pose_from_json(value, path + ": extrinsics[" + key + "]");
  }

  const auto& frames = j["frames"];
  if (!frames.is_array()) fail(path, "'frames' must be an array");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::string where = path + ": frames[" + std::to_string(i) + "]";
    const auto& f = frames[i];
    for (const char* key : {"t", "pose", "intrinsics", "mask"})
      if (!f.contains(key)) fail(where, std::string("missing '") + key + "'");
    FrameRecord rec;
    rec.timestamp = f["t"].get<double>();
    rec.pose = pose_from_json(f["pose"], where);
    rec.intrinsics = intrinsics_from_json(f["intrinsics"], where);
    rec.mask_path = resolve(f["mask"].get<std::string>());
    if (!fs::exists(rec.mask_path))
      fail(where, "mask file not found: " + rec.mask_path);
    if (!cap.frames.empty() && rec.timestamp <= cap.frames.back().timestamp)
      fail(where, "non-monotonic frame timestamp");
    cap.frames.push_back(std::move(rec));
  }
  for (std::size_t i = 0; i < cap.frames.size(); ++i) {
    GlassMask m = load_mask(cap.frames[i].mask_path);
    if (m.width != cap.frames[i].intrinsics.width ||
        m.height != cap.frames[i].intrinsics.height)
      fail(path + ": frames[" + std::to_string(i) + "]",
           "mask dimensions do not match intrinsics");
    cap.masks.push_back(std::move(m));
  }

  const auto& traj = j["trajectory"];
  if (!traj.is_array()) fail(path, "'trajectory' must be an array");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::string where = path + ": trajectory[" + std::to_string(i) + "]";
    const auto& e = traj[i];
    if (!e.contains("t") || !e.contains("pose")) fail(where, "missing 't' or 'pose'");
    TimedPose tp{e["t"].get<double>(), pose_from_json(e["pose"], where)};
    if (!cap.trajectory.empty() && tp.timestamp <= cap.trajectory.back().timestamp)
      fail(where, "non-monotonic trajectory timestamp");
    cap.trajectory.push_back(tp);
  }

  std::string ping_path = resolve(j["pings"].get<std::string>());
  std::vector<PingRow> rows = load_ping_csv(ping_path);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PingRow& a, const PingRow& b) {
                     return a.timestamp < b.timestamp;
                   });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = extrinsics.find(rows[i].sensor_id);
    if (it == extrinsics.end())
      fail(ping_path + ": row " + std::to_string(i + 2),
           "sensor id " + std::to_string(rows[i].sensor_id) +
               " has no extrinsic in the manifest");
    cap.pings.push_back(
        {rows[i].timestamp, rows[i].sensor_id, rows[i].range, it->second});
  }

  cap.scene_cloud = load_ply(resolve(j["scene_cloud"].get<std::string>()));
  return cap;
}

PoseSE3 pose_at(const std::vector<TimedPose>& trajectory, double t, double margin) {
  if (trajectory.empty())
    throw std::invalid_argument("pose_at: empty trajectory");
  double lo = trajectory.front().timestamp, hi = trajectory.back().timestamp;
  if (t < lo - margin || t > hi + margin)
    throw std::out_of_range("pose_at: t=" + std::to_string(t) +
                            " outside trajectory [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] +- " + std::to_string(margin));
  if (t <= lo) return trajectory.front().pose;
  if (t >= hi) return trajectory.back().pose;

  auto it = std::upper_bound(
      trajectory.begin(), trajectory.end(), t,
      [](double v, const TimedPose& p) { return v < p.timestamp; });
  const TimedPose& b = *it;
  const TimedPose& a = *(it - 1);
  if (t == a.timestamp) return a.pose;
  double u = (t - a.timestamp) / (b.timestamp - a.timestamp);

  PoseSE3 out;
  out.translation = a.pose.translation * (1 - u) + b.pose.translation * u;
  Quat qa = Quat::from_matrix(a.pose.rotation);
  Quat qb = Quat::from_matrix(b.pose.rotation);
  out.rotation = slerp(qa, qb, u).to_matrix();
  return out;
}

std::optional<Vec3> ping_to_world(const AcousticPing& ping,
                                  const PoseSE3& camera_pose,
                                  const RangeGate& gate) {
  if (!gate.accepts(ping.range)) return std::nullopt;
  Vec3 local{0, 0, ping.range};  // sensor forward is +z
  return camera_pose.compose(ping.extrinsic).apply(local);
}

AcousticPointCloud build_apc(const std::vector<FrameRecord>& frames,
                             const std::vector<AcousticPing>& pings,
                             const std::vector<TimedPose>& trajectory,
                             const RangeGate& gate) {
  std::vector<TimedPose> traj = trajectory;
  if (traj.empty()) {
    for (const auto& f : frames) traj.push_back({f.timestamp, f.pose});
  }
  if (traj.empty())
    throw std::invalid_argument("build_apc: no trajectory and no frames");

  AcousticPointCloud apc;
  for (std::size_t i = 0; i < pings.size(); ++i) {
    std::optional<Vec3> p;
    try {
      p = ping_to_world(pings[i], pose_at(traj, pings[i].timestamp), gate);
    } catch (const std::out_of_range&) {
      p = std::nullopt;  // ping outside the pose margin
    }
    if (!p) {
      ++apc.rejected;
      continue;
    }
    apc.points.points.push_back(*p);
    apc.ping_index.push_back(i);
  }
  if (apc.rejected > 0)
    log_warn("build_apc: rejected ", apc.rejected, " of ", pings.size(), " pings");
  return apc;
}

}  // namespace vair
