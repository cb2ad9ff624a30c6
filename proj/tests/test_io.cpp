#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vair/density_grid.hpp"
#include "vair/io.hpp"
#include "vair/mesh.hpp"
#include "vair/rng.hpp"

using namespace vair;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "vair_test_io";
  fs::create_directories(dir);
  return dir / name;
}

PointCloud random_cloud(int n, bool colors) {
  Rng rng(7);
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    c.points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
    if (colors)
      c.colors.push_back({std::uint8_t(rng.uniform_int(0, 255)),
                          std::uint8_t(rng.uniform_int(0, 255)),
                          std::uint8_t(rng.uniform_int(0, 255))});
  }
  return c;
}

// Points survive PLY as float32, so compare after the same quantization.
void check_cloud_f32_equal(const PointCloud& a, const PointCloud& b) {
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(float(a.points[i].x) == float(b.points[i].x));
    CHECK(float(a.points[i].y) == float(b.points[i].y));
    CHECK(float(a.points[i].z) == float(b.points[i].z));
  }
  REQUIRE(a.colors.size() == b.colors.size());
  for (std::size_t i = 0; i < a.colors.size(); ++i) CHECK(a.colors[i] == b.colors[i]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("PLY round-trips points in both encodings") {
  PointCloud c = random_cloud(200, false);
  for (bool binary : {false, true}) {
    fs::path p = scratch(binary ? "rt_bin.ply" : "rt_ascii.ply");
    save_ply(p.string(), c, binary);
    check_cloud_f32_equal(load_ply(p.string()), c);
  }
}

TEST_CASE("PLY round-trips colors and pillar ids") {
  PointCloud c = random_cloud(50, true);
  std::vector<int> ids;
  for (int i = 0; i < 50; ++i) ids.push_back(i % 7 - 3);
  for (bool binary : {false, true}) {
    fs::path p = scratch("rt_ids.ply");
    save_ply(p.string(), c, binary, &ids);
    std::vector<int> back_ids;
    PointCloud back = load_ply(p.string(), &back_ids);
    check_cloud_f32_equal(back, c);
    CHECK(back_ids == ids);
  }
}

TEST_CASE("PLY loader skips unknown properties and elements") {
  fs::path p = scratch("extra.ply");
  std::ofstream(p) << "ply\n"
                      "format ascii 1.0\n"
                      "comment synthetic\n"
                      "element vertex 2\n"
                      "property float x\n"
                      "property float y\n"
                      "property float z\n"
                      "property float confidence\n"
                      "element face 1\n"
                      "property list uchar int vertex_indices\n"
                      "end_header\n"
                      "1 2 3 0.5\n"
                      "4 5 6 0.25\n"
                      "3 0 1 1\n";
  PointCloud c = load_ply(p.string());
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].x == 1.0);
  CHECK(c.points[1].z == 6.0);
  CHECK(!c.has_colors());
}

TEST_CASE("PLY loader rejects garbage") {
  fs::path bad = scratch("bad.ply");
  std::ofstream(bad) << "not ply at all\n";
  CHECK_THROWS_AS(load_ply(bad.string()), ParseError);

  fs::path trunc = scratch("trunc.ply");
  std::ofstream(trunc) << "ply\nformat ascii 1.0\nelement vertex 3\n"
                          "property float x\nproperty float y\nproperty float z\n"
                          "end_header\n1 2 3\n";
  CHECK_THROWS_AS(load_ply(trunc.string()), ParseError);

  CHECK_THROWS_AS(load_ply(scratch("missing.ply").string()), ParseError);
}

TEST_CASE("grid file layout is magic, version, dims, bounds, f32 values") {
  DensityGrid g(3, 2, 2, {{-1, 0, 0.5}, {2, 4, 2.5}});
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = double(i) * 1.5;
  fs::path p = scratch("layout.vgrd");
  save_grid(p.string(), g);

  std::string bytes = slurp(p);
  REQUIRE(bytes.size() == 4 + 1 + 12 + 48 + g.values.size() * 4);
  CHECK(bytes.compare(0, 4, "VGRD") == 0);
  CHECK(bytes[4] == 1);
  std::uint32_t dims[3];
  std::memcpy(dims, bytes.data() + 5, 12);
  CHECK(dims[0] == 3);
  CHECK(dims[1] == 2);
  CHECK(dims[2] == 2);
  double bounds[6];
  std::memcpy(bounds, bytes.data() + 17, 48);
  CHECK(bounds[0] == -1.0);
  CHECK(bounds[4] == 4.0);
  float first;
  std::memcpy(&first, bytes.data() + 65, 4);
  CHECK(first == 0.0f);
  float second;
  std::memcpy(&second, bytes.data() + 69, 4);
  CHECK(second == 1.5f);  // x-fastest: value at node (1,0,0)
}

TEST_CASE("grid round-trip preserves dims, bounds, and f32 values") {
  Rng rng(11);
  DensityGrid g(5, 4, 3, {{0, 0, 0}, {3, 3, 4}});
  for (auto& v : g.values) v = rng.uniform(0, 100);
  fs::path p = scratch("rt.vgrd");
  save_grid(p.string(), g);
  DensityGrid back = load_grid(p.string());
  CHECK(back.nx == 5);
  CHECK(back.ny == 4);
  CHECK(back.nz == 3);
  CHECK(back.bounds.max.z == 4.0);
  REQUIRE(back.values.size() == g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i)
    CHECK(back.values[i] == double(float(g.values[i])));
}

TEST_CASE("grid loader rejects wrong magic and version") {
  fs::path p = scratch("badmagic.vgrd");
  std::ofstream(p, std::ios::binary) << "GRID" << '\x01' << std::string(64, '\0');
  CHECK_THROWS_AS(load_grid(p.string()), ParseError);

  DensityGrid g(2, 2, 2, {{0, 0, 0}, {1, 1, 1}});
  fs::path v = scratch("badver.vgrd");
  save_grid(v.string(), g);
  std::string bytes = slurp(v);
  bytes[4] = 2;
  std::ofstream(v, std::ios::binary) << bytes;
  CHECK_THROWS_AS(load_grid(v.string()), ParseError);

  fs::path t = scratch("truncgrid.vgrd");
  save_grid(t.string(), g);
  std::string whole = slurp(t);
  std::ofstream(t, std::ios::binary) << whole.substr(0, whole.size() - 2);
  CHECK_THROWS_AS(load_grid(t.string()), ParseError);
}

TEST_CASE("mesh exports parse back with matching counts") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.faces = {{0, 1, 2}, {0, 1, 3}};

  fs::path ply = scratch("mesh.ply");
  save_mesh_ply(ply.string(), m);
  std::string text = slurp(ply);
  CHECK(text.find("element vertex 4") != std::string::npos);
  CHECK(text.find("element face 2") != std::string::npos);
  PointCloud verts = load_ply(ply.string());
  REQUIRE(verts.points.size() == 4);
  CHECK(verts.points[3].z == 1.0);

  fs::path obj = scratch("mesh.obj");
  save_mesh_obj(obj.string(), m);
  std::ifstream in(obj);
  int nv = 0, nf = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++nv;
    if (line.rfind("f ", 0) == 0) ++nf;
  }
  CHECK(nv == 4);
  CHECK(nf == 2);
  CHECK(slurp(obj).find("f 1 2 3") != std::string::npos);  // 1-based indices
}

TEST_CASE("gray PNG round-trips pixels exactly") {
  Image8 img;
  img.width = 9;
  img.height = 5;
  img.pixels.resize(45);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = std::uint8_t((i * 37) % 256);
  fs::path p = scratch("gray.png");
  save_gray_png(p.string(), img);
  Image8 back = load_gray_png(p.string());
  CHECK(back.width == 9);
  CHECK(back.height == 5);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("gray PNG loader rejects non-PNG data") {
  fs::path p = scratch("fake.png");
  std::ofstream(p) << "definitely not a png";
  CHECK_THROWS(load_gray_png(p.string()));
}

TEST_CASE("ping CSV header is exact and rows round-trip") {
  std::vector<PingRow> rows{{0.0, 0, 1.25}, {0.1, 2, 3.999999999}, {0.2, 1, 0.5}};
  fs::path p = scratch("pings.csv");
  save_ping_csv(p.string(), rows);

  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "timestamp_s,sensor_id,range_m");

  std::vector<PingRow> back = load_ping_csv(p.string());
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].timestamp == rows[i].timestamp);
    CHECK(back[i].sensor_id == rows[i].sensor_id);
    CHECK(back[i].range == rows[i].range);
  }
}

TEST_CASE("ping CSV rejects bad headers and malformed rows") {
  fs::path p = scratch("badhdr.csv");
  std::ofstream(p) << "time,sensor,range\n0,0,1\n";
  CHECK_THROWS_AS(load_ping_csv(p.string()), ParseError);

  fs::path q = scratch("badrow.csv");
  std::ofstream(q) << "timestamp_s,sensor_id,range_m\n0.0,0,1.0\nnonsense\n";
  bool threw = false;
  try {
    load_ping_csv(q.string());
  } catch (const ParseError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("empty ping log is an empty row list, not an error") {
  fs::path p = scratch("empty.csv");
  std::ofstream(p) << "timestamp_s,sensor_id,range_m\n";
  CHECK(load_ping_csv(p.string()).empty());
}
