#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vair/ingest.hpp"
#include "vair/io.hpp"
#include "vair/rng.hpp"

using namespace vair;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

json pose_json(const PoseSE3& p) {
  json a = json::array();
  for (double v : p.to_mat4()) a.push_back(v);
  return a;
}

json intr_json() {
  return json{{"fx", 4.0}, {"fy", 4.0}, {"cx", 4.0}, {"cy", 3.0}, {"w", 8}, {"h", 6}};
}

// Minimal two-frame capture with one sensor and three pings on disk.
fs::path write_capture(const std::string& name,
                       const std::vector<double>& ranges = {1.0, 2.0, 3.0}) {
  fs::path dir = fs::temp_directory_path() / "vair_test_ingest" / name;
  fs::create_directories(dir / "masks");

  Image8 mask;
  mask.width = 8;
  mask.height = 6;
  mask.pixels.assign(48, 0);
  mask.pixels[0] = 255;
  save_gray_png((dir / "masks" / "f0.png").string(), mask);
  save_gray_png((dir / "masks" / "f1.png").string(), mask);

  PointCloud cloud;
  cloud.points = {{0, 0, 1}, {0.5, 0.5, 1}};
  save_ply((dir / "scene.ply").string(), cloud);

  std::vector<PingRow> rows;
  for (std::size_t i = 0; i < ranges.size(); ++i)
    rows.push_back({0.1 * double(i), 0, ranges[i]});
  save_ping_csv((dir / "pings.csv").string(), rows);

  PoseSE3 p0 = PoseSE3::identity();
  PoseSE3 p1 = PoseSE3::identity();
  p1.translation = {1, 0, 0};

  json m;
  m["frames"] = json::array(
      {json{{"t", 0.0}, {"pose", pose_json(p0)}, {"intrinsics", intr_json()}, {"mask", "masks/f0.png"}},
       json{{"t", 0.5}, {"pose", pose_json(p1)}, {"intrinsics", intr_json()}, {"mask", "masks/f1.png"}}});
  m["pings"] = "pings.csv";
  m["scene_cloud"] = "scene.ply";
  m["trajectory"] = json::array({json{{"t", 0.0}, {"pose", pose_json(p0)}},
                                 json{{"t", 0.5}, {"pose", pose_json(p1)}}});
  m["extrinsics"] = json{{"0", pose_json(PoseSE3::identity())}};

  std::ofstream((dir / "manifest.json")) << m.dump(2);
  return dir / "manifest.json";
}

bool message_contains(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

PoseSE3 yaw_pose(double angle, const Vec3& t) {
  return {Mat3::rotation_z(angle), t};
}

}  // namespace

TEST_CASE("mask_from_image marks exactly the nonzero pixels") {
  Image8 img;
  img.width = 3;
  img.height = 2;
  img.pixels = {0, 1, 0, 255, 0, 7};
  GlassMask m = mask_from_image(img);
  CHECK(!m.at(0, 0));
  CHECK(m.at(1, 0));
  CHECK(m.at(0, 1));
  CHECK(!m.at(1, 1));
  CHECK(m.at(2, 1));
}

TEST_CASE("manifest loads with matching counts and sorted pings") {
  fs::path p = write_capture("good");
  Capture cap = load_manifest(p.string());
  CHECK(cap.frames.size() == 2);
  CHECK(cap.masks.size() == 2);
  CHECK(cap.pings.size() == 3);
  CHECK(cap.trajectory.size() == 2);
  CHECK(cap.scene_cloud.points.size() == 2);
  CHECK(cap.frames[1].timestamp == 0.5);
  CHECK(cap.pings[0].range == 1.0);
  CHECK(cap.pings[2].range == 3.0);
  CHECK(cap.masks[0].at(0, 0));
  CHECK(!cap.masks[0].at(1, 0));
}

TEST_CASE("manifest with an empty ping log still yields the frames") {
  fs::path p = write_capture("noping", {});
  Capture cap = load_manifest(p.string());
  CHECK(cap.frames.size() == 2);
  CHECK(cap.pings.empty());
  CHECK(!cap.scene_cloud.empty());
}

TEST_CASE("manifest errors name the offending entry") {
  fs::path p = write_capture("missingmask");
  json m;
  {
    std::ifstream in(p);
    in >> m;
  }
  m["frames"][1]["mask"] = "masks/absent.png";
  std::ofstream(p) << m.dump(2);
  CHECK(message_contains([&] { load_manifest(p.string()); }, "absent.png"));
  CHECK(message_contains([&] { load_manifest(p.string()); }, "frames[1]"));
}

TEST_CASE("manifest rejects non-monotonic frame timestamps") {
  fs::path p = write_capture("nonmono");
  json m;
  {
    std::ifstream in(p);
    in >> m;
  }
  m["frames"][1]["t"] = 0.0;
  std::ofstream(p) << m.dump(2);
  CHECK(message_contains([&] { load_manifest(p.string()); }, "non-monotonic"));
}

TEST_CASE("manifest rejects unknown keys and missing sections") {
  fs::path p = write_capture("unknownkey");
  json m;
  {
    std::ifstream in(p);
    in >> m;
  }
  m["surprise"] = 1;
  std::ofstream(p) << m.dump(2);
  CHECK(message_contains([&] { load_manifest(p.string()); }, "surprise"));

  fs::path q = write_capture("nosection");
  {
    std::ifstream in(q);
    in >> m;
  }
  m.erase("surprise");
  m.erase("trajectory");
  std::ofstream(q) << m.dump(2);
  CHECK(message_contains([&] { load_manifest(q.string()); }, "trajectory"));
}

TEST_CASE("manifest rejects pings from sensors without extrinsics") {
  fs::path p = write_capture("nosensor");
  std::vector<PingRow> rows{{0.0, 5, 1.0}};
  save_ping_csv((p.parent_path() / "pings.csv").string(), rows);
  CHECK(message_contains([&] { load_manifest(p.string()); }, "sensor id 5"));
}

TEST_CASE("pose_at returns exact poses at trajectory timestamps") {
  std::vector<TimedPose> traj{{0.0, yaw_pose(0.0, {0, 0, 0})},
                              {1.0, yaw_pose(0.3, {2, 0, 0})},
                              {2.0, yaw_pose(0.9, {5, 1, 0})}};
  for (const auto& tp : traj) {
    PoseSE3 p = pose_at(traj, tp.timestamp);
    for (int i = 0; i < 9; ++i)
      CHECK(p.rotation.m[i] == doctest::Approx(tp.pose.rotation.m[i]).epsilon(1e-12));
    CHECK(p.translation.x == tp.pose.translation.x);
  }
}

TEST_CASE("pose_at midpoint translation is the linear midpoint") {
  std::vector<TimedPose> traj{{0.0, yaw_pose(0.0, {0, 0, 0})},
                              {1.0, yaw_pose(0.0, {2, 0, 0})}};
  PoseSE3 p = pose_at(traj, 0.5);
  CHECK(p.translation.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.translation.y == 0.0);
}

TEST_CASE("pose_at midpoint rotation is the slerp midpoint") {
  std::vector<TimedPose> traj{{0.0, yaw_pose(0.0, {0, 0, 0})},
                              {1.0, yaw_pose(kPi / 2, {0, 0, 0})}};
  PoseSE3 p = pose_at(traj, 0.5);
  Mat3 expect = Mat3::rotation_z(kPi / 4);
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(p.rotation.m[i] - expect.m[i]) < 1e-9);
}

TEST_CASE("pose_at clamps within the margin and throws beyond it") {
  std::vector<TimedPose> traj{{0.0, yaw_pose(0.0, {0, 0, 0})},
                              {1.0, yaw_pose(0.0, {2, 0, 0})}};
  CHECK(pose_at(traj, -0.19).translation.x == 0.0);
  CHECK(pose_at(traj, 1.19).translation.x == 2.0);
  CHECK_THROWS_AS(pose_at(traj, -0.21), std::out_of_range);
  CHECK_THROWS_AS(pose_at(traj, 1.21), std::out_of_range);
  CHECK_THROWS_AS(pose_at({}, 0.0), std::invalid_argument);
}

TEST_CASE("ping_to_world identity pose puts the return on the optical axis") {
  AcousticPing ping;
  ping.range = 2.0;
  auto p = ping_to_world(ping, PoseSE3::identity());
  REQUIRE(p.has_value());
  CHECK(p->x == 0.0);
  CHECK(p->y == 0.0);
  CHECK(p->z == 2.0);
}

TEST_CASE("ping_to_world composes the sensor extrinsic") {
  AcousticPing ping;
  ping.range = 2.0;
  ping.extrinsic = {Mat3::rotation_y(kPi / 2), {0, 0, 0}};  // +z -> +x
  auto p = ping_to_world(ping, PoseSE3::identity());
  REQUIRE(p.has_value());
  CHECK(std::abs(p->x - 2.0) < 1e-9);
  CHECK(std::abs(p->y) < 1e-9);
  CHECK(std::abs(p->z) < 1e-9);
}

TEST_CASE("ping_to_world gates ranges as (min, max]") {
  AcousticPing ping;
  RangeGate gate;  // (0.02, 4.0]
  ping.range = 0.0;
  CHECK(!ping_to_world(ping, PoseSE3::identity(), gate));
  ping.range = 0.02;
  CHECK(!ping_to_world(ping, PoseSE3::identity(), gate));
  ping.range = 4.0;
  CHECK(ping_to_world(ping, PoseSE3::identity(), gate).has_value());
  ping.range = 4.0001;
  CHECK(!ping_to_world(ping, PoseSE3::identity(), gate));
}

TEST_CASE("build_apc maps valid pings and counts the rest") {
  std::vector<TimedPose> traj{{0.0, PoseSE3::identity()},
                              {1.0, PoseSE3::identity()}};
  std::vector<AcousticPing> pings;
  for (double r : {1.0, 2.0, 3.0}) {
    AcousticPing ping;
    ping.timestamp = 0.5;
    ping.range = r;
    pings.push_back(ping);
  }
  AcousticPointCloud apc = build_apc({}, pings, traj);
  REQUIRE(apc.points.size() == 3);
  CHECK(apc.rejected == 0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(apc.points.points[i].z == double(i + 1));
    CHECK(apc.ping_index[i] == i);
  }

  AcousticPing bad_range = pings[0];
  bad_range.range = 9.0;
  AcousticPing bad_time = pings[0];
  bad_time.timestamp = 5.0;
  pings.push_back(bad_range);
  pings.push_back(bad_time);
  AcousticPointCloud mixed = build_apc({}, pings, traj);
  CHECK(mixed.points.size() == 3);
  CHECK(mixed.rejected == 2);
  CHECK(mixed.points.size() + mixed.rejected == pings.size());
}

TEST_CASE("build_apc with no pings is empty; with no poses it is an error") {
  std::vector<TimedPose> traj{{0.0, PoseSE3::identity()}};
  CHECK(build_apc({}, {}, traj).points.empty());
  AcousticPing ping;
  ping.range = 1.0;
  CHECK_THROWS_AS(build_apc({}, {ping}, {}), std::invalid_argument);
}

TEST_CASE("build_apc falls back on frame poses when the trajectory is empty") {
  std::vector<FrameRecord> frames(2);
  frames[0].timestamp = 0.0;
  frames[1].timestamp = 1.0;
  frames[1].pose.translation = {2, 0, 0};
  AcousticPing ping;
  ping.timestamp = 0.5;
  ping.range = 1.0;
  AcousticPointCloud apc = build_apc(frames, {ping}, {});
  REQUIRE(apc.points.size() == 1);
  CHECK(apc.points.points[0].x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(apc.points.points[0].z == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rigidly moving the trajectory moves every APC point the same way") {
  Rng rng(3);
  std::vector<TimedPose> traj;
  for (int i = 0; i < 4; ++i)
    traj.push_back({double(i),
                    yaw_pose(rng.uniform(-1, 1),
                             {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 1)})});

  std::vector<AcousticPing> pings;
  for (int i = 0; i < 10; ++i) {
    AcousticPing ping;
    ping.timestamp = rng.uniform(0.0, 3.0);
    ping.range = rng.uniform(0.5, 3.5);
    ping.extrinsic = {Mat3::rotation_y(rng.uniform(-1.5, 1.5)), {0.05, 0, 0}};
    pings.push_back(ping);
  }

  PoseSE3 T{Mat3::rotation_z(0.7) * Mat3::rotation_x(0.2), {5, -1, 2}};
  std::vector<TimedPose> moved = traj;
  for (auto& tp : moved) tp.pose = T.compose(tp.pose);

  AcousticPointCloud a = build_apc({}, pings, traj);
  AcousticPointCloud b = build_apc({}, pings, moved);
  REQUIRE(a.points.size() == pings.size());
  REQUIRE(b.points.size() == pings.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    Vec3 expect = T.apply(a.points.points[i]);
    CHECK(std::abs(b.points.points[i].x - expect.x) < 1e-9);
    CHECK(std::abs(b.points.points[i].y - expect.y) < 1e-9);
    CHECK(std::abs(b.points.points[i].z - expect.z) < 1e-9);
  }
}
