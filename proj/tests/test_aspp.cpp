#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "vair/aspp.hpp"
#include "vair/io.hpp"
#include "vair/rng.hpp"

using namespace vair;
namespace fs = std::filesystem;

namespace {

FrameRecord identity_frame(int w, int h, double f) {
  FrameRecord fr;
  fr.intrinsics = {f, f, w / 2.0, h / 2.0, w, h};
  return fr;
}

GlassMask full_mask(int w, int h) {
  GlassMask m;
  m.width = w;
  m.height = h;
  m.bits.assign(std::size_t(w) * h, 1);
  return m;
}

GlassMask empty_mask(int w, int h) {
  GlassMask m = full_mask(w, h);
  std::fill(m.bits.begin(), m.bits.end(), std::uint8_t(0));
  return m;
}

AcousticPointCloud apc_of(const std::vector<Vec3>& pts) {
  AcousticPointCloud apc;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    apc.points.points.push_back(pts[i]);
    apc.ping_index.push_back(i);
  }
  return apc;
}

SemanticRaySet rays_from_origin(const std::vector<Vec3>& dirs) {
  SemanticRaySet set;
  for (const Vec3& d : dirs)
    set.rays.push_back({Ray{{0, 0, 0}, d.normalized()}, 0, 0, 0});
  return set;
}

}  // namespace

TEST_CASE("glass_rays on an all-zero mask is empty") {
  std::vector<FrameRecord> frames{identity_frame(8, 6, 4)};
  std::vector<GlassMask> masks{empty_mask(8, 6)};
  CHECK(glass_rays(frames, masks).rays.empty());
}

TEST_CASE("glass_rays through the principal point is the optical axis") {
  std::vector<FrameRecord> frames{identity_frame(8, 6, 4)};
  std::vector<GlassMask> masks{empty_mask(8, 6)};
  masks[0].bits[std::size_t(3) * 8 + 4] = 1;  // pixel (4, 3) = (cx, cy)
  SemanticRaySet set = glass_rays(frames, masks, 1);
  REQUIRE(set.rays.size() == 1);
  CHECK(set.rays[0].u == 4);
  CHECK(set.rays[0].v == 3);
  CHECK(std::abs(set.rays[0].ray.direction.x) < 1e-12);
  CHECK(std::abs(set.rays[0].ray.direction.y) < 1e-12);
  CHECK(set.rays[0].ray.direction.z == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("glass_rays strides the pixel grid anchored at zero") {
  std::vector<FrameRecord> frames{identity_frame(4, 4, 2)};
  frames[0].intrinsics = {2, 2, 1.5, 1.5, 4, 4};
  std::vector<GlassMask> masks{full_mask(4, 4)};
  SemanticRaySet set = glass_rays(frames, masks, 2);
  REQUIRE(set.rays.size() == 4);
  std::set<std::pair<int, int>> pixels;
  for (const auto& r : set.rays) pixels.insert({r.u, r.v});
  CHECK(pixels == std::set<std::pair<int, int>>{{0, 0}, {0, 2}, {2, 0}, {2, 2}});
}

TEST_CASE("glass_rays validates stride and frame/mask pairing") {
  std::vector<FrameRecord> frames{identity_frame(8, 6, 4)};
  std::vector<GlassMask> masks{empty_mask(8, 6)};
  CHECK_THROWS_AS(glass_rays(frames, masks, 0), std::invalid_argument);
  CHECK_THROWS_AS(glass_rays(frames, {}, 1), std::invalid_argument);
}

TEST_CASE("three rays through one vertical axis build the textbook pillar") {
  AcousticPointCloud apc = apc_of({{2, 0, 1}});
  SemanticRaySet rays =
      rays_from_origin({{2, 0, 0.5}, {2, 0, 1.0}, {2, 0, 1.5}});
  std::vector<Pillar> pillars = build_pillars(apc, rays, 0.1);
  REQUIRE(pillars.size() == 1);
  const Pillar& p = pillars[0];
  CHECK(!p.degenerate);
  REQUIRE(p.support.size() == 3);
  CHECK(p.z_min == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.z_max == doctest::Approx(1.5).epsilon(1e-12));
  for (const Vec3& q : p.support_points) {
    CHECK(std::abs(q.x - 2.0) < 1e-12);
    CHECK(std::abs(q.y) < 1e-12);
  }
}

TEST_CASE("an empty ray set degenerates every pillar to its return") {
  AcousticPointCloud apc = apc_of({{2, 0, 1}, {1, 1, 0.5}});
  std::vector<Pillar> pillars = build_pillars(apc, {}, 0.1);
  REQUIRE(pillars.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(pillars[i].degenerate);
    CHECK(pillars[i].support.empty());
    CHECK(pillars[i].z_min == apc.points.points[i].z);
    CHECK(pillars[i].z_max == apc.points.points[i].z);
  }
}

TEST_CASE("rays outside the radius, behind the origin, or past t_max give no support") {
  AcousticPointCloud apc = apc_of({{2, 0, 1}});
  SemanticRaySet far = rays_from_origin({{2, 0.2001, 1}});  // passes at 2*eps
  CHECK(build_pillars(apc, far, 0.1)[0].degenerate);

  SemanticRaySet behind = rays_from_origin({{-2, 0, 1}});  // closest approach t < 0
  CHECK(build_pillars(apc, behind, 0.1)[0].degenerate);

  SemanticRaySet ahead = rays_from_origin({{2, 0, 1}});
  CHECK(!build_pillars(apc, ahead, 0.1, 10.0)[0].degenerate);
  CHECK(build_pillars(apc, ahead, 0.1, 1.0)[0].degenerate);  // approach at t≈2.24

  SemanticRaySet vertical;
  vertical.rays.push_back({Ray{{2, 0, 0}, {0, 0, 1}}, 0, 0, 0});
  CHECK(build_pillars(apc, vertical, 0.1)[0].degenerate);
}

TEST_CASE("pillar z extent equals the brute-force min and max over support") {
  Rng rng(13);
  AcousticPointCloud apc;
  for (int i = 0; i < 8; ++i) {
    apc.points.points.push_back(
        {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 2)});
    apc.ping_index.push_back(std::size_t(i));
  }
  SemanticRaySet rays;
  for (int i = 0; i < 120; ++i) {
    Vec3 o{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2)};
    Vec3 d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)};
    if (d.norm() < 1e-3) continue;
    rays.rays.push_back({Ray{o, d.normalized()}, 0, 0, 0});
  }
  std::vector<Pillar> pillars = build_pillars(apc, rays, 0.4);
  REQUIRE(pillars.size() == apc.points.size());
  for (const Pillar& p : pillars) {
    if (p.degenerate) continue;
    double lo = p.support_points.front().z, hi = lo;
    for (const Vec3& q : p.support_points) {
      lo = std::min(lo, q.z);
      hi = std::max(hi, q.z);
    }
    CHECK(p.z_min == lo);
    CHECK(p.z_max == hi);
    for (const Vec3& q : p.support_points) {
      double dx = q.x - p.axis_x, dy = q.y - p.axis_y;
      CHECK(std::sqrt(dx * dx + dy * dy) <= p.radius + 1e-9);
    }
  }
}

TEST_CASE("shrinking the radius never adds support") {
  Rng rng(17);
  AcousticPointCloud apc;
  for (int i = 0; i < 6; ++i) {
    apc.points.points.push_back(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 2)});
    apc.ping_index.push_back(std::size_t(i));
  }
  SemanticRaySet rays;
  for (int i = 0; i < 80; ++i) {
    Vec3 d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.3, 0.3)};
    if (d.norm() < 1e-3) continue;
    rays.rays.push_back(
        {Ray{{rng.uniform(-2, 2), rng.uniform(-2, 2), 1}, d.normalized()}, 0, 0, 0});
  }
  std::vector<Pillar> small = build_pillars(apc, rays, 0.1);
  std::vector<Pillar> big = build_pillars(apc, rays, 0.35);
  REQUIRE(small.size() == big.size());
  for (std::size_t i = 0; i < small.size(); ++i) {
    std::set<std::size_t> s(small[i].support.begin(), small[i].support.end());
    std::set<std::size_t> b(big[i].support.begin(), big[i].support.end());
    CHECK(std::includes(b.begin(), b.end(), s.begin(), s.end()));
  }
}

TEST_CASE("sample_aspp fills the axis and keeps every support point") {
  AcousticPointCloud apc = apc_of({{2, 0, 1}});
  SemanticRaySet rays =
      rays_from_origin({{2, 0, 0.5}, {2, 0, 1.0}, {2, 0, 1.5}});
  std::vector<Pillar> pillars = build_pillars(apc, rays, 0.1);
  AsppPoints pts = sample_aspp(pillars, 0.5);

  // 3 support points + axis fill at z in {0.5, 1.0, 1.5}
  REQUIRE(pts.points.size() == 6);
  std::vector<double> fill_z;
  for (std::size_t i = 3; i < 6; ++i) fill_z.push_back(pts.points.points[i].z);
  std::sort(fill_z.begin(), fill_z.end());
  CHECK(fill_z[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fill_z[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fill_z[2] == doctest::Approx(1.5).epsilon(1e-12));
  for (int id : pts.pillar_id) CHECK(id == 0);
}

TEST_CASE("sample_aspp appends the top when the spacing misses it") {
  Pillar p;
  p.axis_x = 1;
  p.axis_y = 2;
  p.z_min = 0.0;
  p.z_max = 0.75;
  p.support = {0};
  p.support_points = {{1, 2, 0.375}};
  AsppPoints pts = sample_aspp({p}, 0.5);
  // support + fill {0, 0.5} + appended z_max
  REQUIRE(pts.points.size() == 4);
  CHECK(pts.points.points.back().z == 0.75);
}

TEST_CASE("a degenerate pillar contributes exactly its acoustic return") {
  AcousticPointCloud apc = apc_of({{2, 0, 1}});
  std::vector<Pillar> pillars = build_pillars(apc, {}, 0.1);
  AsppPoints pts = sample_aspp(pillars, 0.05);
  REQUIRE(pts.points.size() == 1);
  CHECK(pts.points.points[0].x == 2.0);
  CHECK(pts.points.points[0].y == 0.0);
  CHECK(pts.points.points[0].z == 1.0);
  CHECK(pts.pillar_id[0] == 0);
}

TEST_CASE("duplicated pillars duplicate the sample multiset") {
  AcousticPointCloud apc = apc_of({{2, 0, 1}});
  SemanticRaySet rays = rays_from_origin({{2, 0, 0.5}, {2, 0, 1.5}});
  std::vector<Pillar> one = build_pillars(apc, rays, 0.1);
  std::vector<Pillar> two = {one[0], one[0]};
  AsppPoints a = sample_aspp(one, 0.5);
  AsppPoints b = sample_aspp(two, 0.5);
  REQUIRE(b.points.size() == 2 * a.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const Vec3& p = a.points.points[i];
    const Vec3& q = b.points.points[a.points.size() + i];
    CHECK(p.x == q.x);
    CHECK(p.y == q.y);
    CHECK(p.z == q.z);
  }
  CHECK(b.pillar_id.back() == 1);
}

TEST_CASE("every emitted point sits within the radius of its pillar axis") {
  Rng rng(23);
  AcousticPointCloud apc;
  for (int i = 0; i < 5; ++i) {
    apc.points.points.push_back(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 1.8)});
    apc.ping_index.push_back(std::size_t(i));
  }
  SemanticRaySet rays;
  for (int i = 0; i < 60; ++i) {
    Vec3 d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.4, 0.4)};
    if (d.norm() < 1e-3) continue;
    rays.rays.push_back(
        {Ray{{rng.uniform(-2, 2), rng.uniform(-2, 2), 1}, d.normalized()}, 0, 0, 0});
  }
  double eps = 0.3;
  std::vector<Pillar> pillars = build_pillars(apc, rays, eps);
  AsppPoints pts = sample_aspp(pillars, 0.1);
  REQUIRE(pts.points.size() == pts.pillar_id.size());
  for (std::size_t i = 0; i < pts.points.size(); ++i) {
    const Pillar& p = pillars[std::size_t(pts.pillar_id[i])];
    double dx = pts.points.points[i].x - p.axis_x;
    double dy = pts.points.points[i].y - p.axis_y;
    CHECK(std::sqrt(dx * dx + dy * dy) <= eps + 1e-6);
    CHECK(pts.points.points[i].z >= p.z_min - 1e-6);
    CHECK(pts.points.points[i].z <= p.z_max + 1e-6);
  }
}

TEST_CASE("aspp PLY export round-trips points and pillar ids") {
  AcousticPointCloud apc = apc_of({{2, 0, 1}, {0, 1, 0.5}});
  SemanticRaySet rays = rays_from_origin({{2, 0, 0.5}, {2, 0, 1.5}});
  AsppPoints pts = sample_aspp(build_pillars(apc, rays, 0.1), 0.25);
  fs::path dir = fs::temp_directory_path() / "vair_test_aspp";
  fs::create_directories(dir);
  fs::path p = dir / "aspp.ply";
  save_aspp_ply(p.string(), pts);
  std::vector<int> ids;
  PointCloud back = load_ply(p.string(), &ids);
  REQUIRE(back.points.size() == pts.points.size());
  CHECK(ids == pts.pillar_id);
  for (std::size_t i = 0; i < back.points.size(); ++i)
    CHECK(float(back.points[i].z) == float(pts.points.points[i].z));
}
