#include "vair/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "vair/io.hpp"
#include "vair/json_util.hpp"

namespace vair {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void add_quad(TriMesh& m, const Vec3& a, const Vec3& b, const Vec3& c,
              const Vec3& d) {
  std::uint32_t i = std::uint32_t(m.vertices.size());
  m.vertices.insert(m.vertices.end(), {a, b, c, d});
  m.faces.push_back({i, i + 1, i + 2});
  m.faces.push_back({i, i + 2, i + 3});
}

void add_box(TriMesh& m, const Box3& b) {
  Vec3 lo = b.min, hi = b.max;
  add_quad(m, {lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z});
  add_quad(m, {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z});
  add_quad(m, {lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, lo.y, hi.z}, {lo.x, lo.y, hi.z});
  add_quad(m, {lo.x, hi.y, lo.z}, {hi.x, hi.y, lo.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z});
  add_quad(m, {lo.x, lo.y, lo.z}, {lo.x, hi.y, lo.z}, {lo.x, hi.y, hi.z}, {lo.x, lo.y, hi.z});
  add_quad(m, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {hi.x, hi.y, hi.z}, {hi.x, lo.y, hi.z});
}

// Sutherland-Hodgman against one axis half-space: keep sign*(p[axis]-level) >= 0.
std::vector<Vec3> clip_poly(const std::vector<Vec3>& poly, int axis, double level,
                            double sign) {
  std::vector<Vec3> out;
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[(i + 1) % n];
    double da = sign * (a[axis] - level);
    double db = sign * (b[axis] - level);
    if (da >= 0) out.push_back(a);
    if ((da >= 0) != (db >= 0)) {
      double t = da / (da - db);
      out.push_back(a + (b - a) * t);
    }
  }
  return out;
}

// Deterministic subset rule shared by make_pair and load_dataset: trans
// negatives are the first k_free free points plus k_surf seeded draws from
// the surface points, all at density 0.
void append_trans_negatives(ScenePair& pair, std::size_t k_free,
                            std::size_t k_surf) {
  for (std::size_t i = 0; i < k_free && i < pair.scene_samples.size() - pair.surface_count; ++i) {
    const Vec3& p = pair.scene_samples[pair.surface_count + i].point;
    pair.trans_samples.push_back({p, 0.0});
  }
  if (k_surf > 0 && pair.surface_count > 0) {
    Rng rng(substream_seed(pair.seed, "trans-neg-surf"));
    for (std::size_t i = 0; i < k_surf; ++i) {
      std::size_t idx = rng.uniform_index(pair.surface_count);
      pair.trans_samples.push_back({pair.scene_samples[idx].point, 0.0});
    }
  }
}

json glass_to_json(const GlassSpec& g) {
  return json{{"kind", glass_kind_name(g.kind)},
              {"center", to_json(g.center)},
              {"width", g.width},
              {"height", g.height},
              {"normal", to_json(g.wall_normal)}};
}

GlassSpec glass_from_json(const json& j) {
  GlassSpec g;
  g.kind = glass_kind_from_name(j.at("kind").get<std::string>());
  g.center = vec3_from_json(j.at("center"));
  g.width = j.at("width").get<double>();
  g.height = j.at("height").get<double>();
  g.wall_normal = vec3_from_json(j.at("normal"));
  return g;
}

}  // namespace

const char* glass_kind_name(GlassKind k) {
  switch (k) {
    case GlassKind::kFullPane: return "full_pane";
    case GlassKind::kHalfPane: return "half_pane";
    case GlassKind::kWindow: return "window";
  }
  return "?";
}

GlassKind glass_kind_from_name(const std::string& name) {
  if (name == "full_pane") return GlassKind::kFullPane;
  if (name == "half_pane") return GlassKind::kHalfPane;
  if (name == "window") return GlassKind::kWindow;
  throw std::invalid_argument("unknown glass kind '" + name + "'");
}

TriMesh generate_room(const RoomSpec& spec) {
  if (spec.wall_height < 2.0)
    throw std::invalid_argument("generate_room: wall_height must be >= 2.0");
  double W = spec.width, D = spec.depth, H = spec.wall_height;

  TriMesh m;
  add_quad(m, {0, 0, 0}, {W, 0, 0}, {W, D, 0}, {0, D, 0});  // floor
  add_quad(m, {0, 0, H}, {W, 0, H}, {W, D, H}, {0, D, H});  // ceiling
  add_quad(m, {0, 0, 0}, {0, D, 0}, {0, D, H}, {0, 0, H});  // x = 0
  add_quad(m, {W, 0, 0}, {W, D, 0}, {W, D, H}, {W, 0, H});  // x = W
  add_quad(m, {0, 0, 0}, {W, 0, 0}, {W, 0, H}, {0, 0, H});  // y = 0
  add_quad(m, {0, D, 0}, {W, D, 0}, {W, D, H}, {0, D, H});  // y = D

  for (const Box3& b : clutter_boxes(spec)) add_box(m, b);
  return m;
}

std::vector<Box3> clutter_boxes(const RoomSpec& spec) {
  double W = spec.width, D = spec.depth;
  Rng rng(spec.seed);
  std::vector<Box3> boxes;
  boxes.reserve(std::size_t(std::max(0, spec.clutter_count)));
  for (int i = 0; i < spec.clutter_count; ++i) {
    double sx = rng.uniform(0.3, 1.2), sy = rng.uniform(0.3, 1.2);
    double sz = rng.uniform(0.3, 1.5);
    double x0 = rng.uniform(0.3, std::max(0.31, W - 0.3 - sx));
    double y0 = rng.uniform(0.3, std::max(0.31, D - 0.3 - sy));
    boxes.push_back({{x0, y0, 0}, {x0 + sx, y0 + sy, sz}});
  }
  return boxes;
}

TriMesh crop_scene(const TriMesh& mesh, const Vec3& origin, const Vec3& crop_size) {
  Box3 box{origin, origin + crop_size};
  TriMesh out;
  for (const auto& f : mesh.faces) {
    std::vector<Vec3> poly = {mesh.vertices[f[0]], mesh.vertices[f[1]],
                              mesh.vertices[f[2]]};
    for (int axis = 0; axis < 3 && !poly.empty(); ++axis) {
      poly = clip_poly(poly, axis, axis == 0 ? box.min.x : axis == 1 ? box.min.y : box.min.z, 1.0);
      if (!poly.empty())
        poly = clip_poly(poly, axis, axis == 0 ? box.max.x : axis == 1 ? box.max.y : box.max.z, -1.0);
    }
    if (poly.size() < 3) continue;
    std::uint32_t base = std::uint32_t(out.vertices.size());
    out.vertices.insert(out.vertices.end(), poly.begin(), poly.end());
    for (std::size_t i = 1; i + 1 < poly.size(); ++i)
      out.faces.push_back({base, base + std::uint32_t(i), base + std::uint32_t(i + 1)});
  }
  if (out.faces.empty())
    throw std::runtime_error("crop_scene: crop box does not intersect the mesh");
  return out;
}

PointCloud sample_surface(const TriMesh& mesh, int n, Rng& rng) {
  if (mesh.faces.empty())
    throw std::invalid_argument("sample_surface: empty mesh");
  std::vector<double> cum(mesh.faces.size());
  double total = 0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    Vec3 e1 = mesh.vertices[f[1]] - mesh.vertices[f[0]];
    Vec3 e2 = mesh.vertices[f[2]] - mesh.vertices[f[0]];
    total += 0.5 * e1.cross(e2).norm();
    cum[i] = total;
  }
  if (total <= 0)
    throw std::invalid_argument("sample_surface: zero total area");

  PointCloud out;
  out.points.reserve(std::size_t(n));
  for (int s = 0; s < n; ++s) {
    double r = rng.uniform(0, total);
    std::size_t i = std::size_t(
        std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    if (i >= mesh.faces.size()) i = mesh.faces.size() - 1;
    const auto& f = mesh.faces[i];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    const Vec3& a = mesh.vertices[f[0]];
    out.points.push_back(a + (mesh.vertices[f[1]] - a) * u +
                         (mesh.vertices[f[2]] - a) * v);
  }
  return out;
}

CarveResult carve_glass(const PointCloud& cloud,
                        const std::vector<GlassSpec>& specs, double margin) {
  for (const auto& g : specs) {
    bool on_wall = false;
    for (const auto& p : cloud.points)
      if (std::abs((p - g.center).dot(g.wall_normal)) <= margin) {
        on_wall = true;
        break;
      }
    if (!on_wall)
      throw std::invalid_argument(
          std::string("carve_glass: ") + glass_kind_name(g.kind) +
          " rectangle lies on no sampled wall plane");
  }

  CarveResult res;
  for (const auto& p : cloud.points) {
    bool glassy = false;
    for (const auto& g : specs)
      if (g.contains(p, margin)) {
        glassy = true;
        break;
      }
    (glassy ? res.cutout : res.surface).points.push_back(p);
  }
  return res;
}

PointCloud sample_free_space(const Box3& bounds, int n,
                             const PointCloud& surfaces, double clearance,
                             Rng& rng) {
  if (clearance <= 0)
    throw std::invalid_argument("sample_free_space: clearance must be positive");

  // hash grid with cell = clearance, so neighbors live in the 27 cells around
  auto cell_key = [&](const Vec3& p) {
    auto c = [&](double v, double lo) {
      return std::int64_t(std::floor((v - lo) / clearance));
    };
    std::int64_t ix = c(p.x, bounds.min.x), iy = c(p.y, bounds.min.y),
                 iz = c(p.z, bounds.min.z);
    return std::uint64_t(ix * 73856093LL ^ iy * 19349663LL ^ iz * 83492791LL);
  };
  std::unordered_multimap<std::uint64_t, std::size_t> grid;
  grid.reserve(surfaces.points.size() * 2);
  for (std::size_t i = 0; i < surfaces.points.size(); ++i)
    grid.emplace(cell_key(surfaces.points[i]), i);

  auto clear_of_surfaces = [&](const Vec3& p) {
    double c2 = clearance * clearance;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          Vec3 q{p.x + dx * clearance, p.y + dy * clearance, p.z + dz * clearance};
          auto [lo, hi] = grid.equal_range(cell_key(q));
          for (auto it = lo; it != hi; ++it)
            if ((surfaces.points[it->second] - p).norm2() < c2) return false;
        }
    return true;
  };

  PointCloud out;
  long budget = 100L * n;
  while (int(out.points.size()) < n) {
    if (budget-- <= 0)
      throw std::runtime_error(
          "sample_free_space: draw budget exhausted (bounds too crowded)");
    Vec3 p{rng.uniform(bounds.min.x, bounds.max.x),
           rng.uniform(bounds.min.y, bounds.max.y),
           rng.uniform(bounds.min.z, bounds.max.z)};
    if (surfaces.points.empty() || clear_of_surfaces(p)) out.points.push_back(p);
  }
  return out;
}

GeneratedScene generate_scene(std::uint64_t master_seed, std::uint64_t index,
                              const SynthConfig& cfg) {
  Rng rng(substream_seed(master_seed, "synthgen", index));

  RoomSpec room;
  room.width = rng.uniform(cfg.room_min, cfg.room_max);
  room.depth = rng.uniform(cfg.room_min, cfg.room_max);
  room.wall_height = rng.uniform(cfg.height_min, cfg.height_max);
  room.clutter_count = rng.uniform_int(cfg.clutter_min, cfg.clutter_max);
  room.seed = rng.next_u64();

  GeneratedScene scene;
  scene.seed = substream_seed(master_seed, "scene", index);
  scene.room = generate_room(room);
  scene.clutter = clutter_boxes(room);
  scene.room_box = {{0, 0, 0}, {room.width, room.depth, room.wall_height}};

  int n_glass = rng.uniform_int(cfg.glass_min, cfg.glass_max);
  std::vector<int> walls = {0, 1, 2, 3};
  rng.shuffle(walls);
  for (int gi = 0; gi < n_glass; ++gi) {
    int wall = walls[std::size_t(gi)];
    double wall_len = (wall < 2) ? room.depth : room.width;
    double H = room.wall_height;

    GlassSpec g;
    g.kind = GlassKind(rng.uniform_int(0, 2));
    bool window = g.kind == GlassKind::kWindow;
    double wmax = std::min(window ? 2.0 : 2.5, wall_len - 0.4);
    double wmin = std::min(window ? 0.6 : 1.0, wmax - 0.01);
    g.width = rng.uniform(wmin, wmax);

    double cz = 0, height = 0;
    switch (g.kind) {
      case GlassKind::kFullPane:
        height = H;
        cz = H / 2;
        break;
      case GlassKind::kHalfPane:
        height = rng.uniform(1.0, 1.6);
        cz = height / 2;
        break;
      case GlassKind::kWindow:
        height = rng.uniform(0.6, std::min(1.4, H - 0.5));
        cz = rng.uniform(height / 2 + 0.2, H - height / 2 - 0.2);
        break;
    }
    g.height = height;
    double cu = rng.uniform(g.width / 2 + 0.2, wall_len - g.width / 2 - 0.2);
    switch (wall) {
      case 0: g.center = {0, cu, cz}; g.wall_normal = {1, 0, 0}; break;
      case 1: g.center = {room.width, cu, cz}; g.wall_normal = {-1, 0, 0}; break;
      case 2: g.center = {cu, 0, cz}; g.wall_normal = {0, 1, 0}; break;
      default: g.center = {cu, room.depth, cz}; g.wall_normal = {0, -1, 0}; break;
    }
    scene.glass.push_back(g);
  }

  // crop anchored on the first pane: its wall plane bisects the box along the
  // normal, tangential center jittered but clamped so the pane stays inside
  const GlassSpec& anchor = scene.glass.front();
  double jitter = rng.uniform(-0.3, 0.3);
  Vec3 origin;
  if (std::abs(anchor.wall_normal.x) > 0.5) {
    origin.x = anchor.center.x - cfg.crop_size.x / 2;
    double lo = anchor.center.y + anchor.width / 2 - cfg.crop_size.y;
    double hi = anchor.center.y - anchor.width / 2;
    origin.y = std::clamp(anchor.center.y - cfg.crop_size.y / 2 + jitter, lo, hi);
  } else {
    origin.y = anchor.center.y - cfg.crop_size.y / 2;
    double lo = anchor.center.x + anchor.width / 2 - cfg.crop_size.x;
    double hi = anchor.center.x - anchor.width / 2;
    origin.x = std::clamp(anchor.center.x - cfg.crop_size.x / 2 + jitter, lo, hi);
  }
  origin.z = -0.5;
  scene.crop_origin = origin;
  return scene;
}

ScenePair make_pair(const GeneratedScene& scene, const SynthConfig& cfg) {
  Rng rng(substream_seed(scene.seed, "pair"));
  Box3 box{scene.crop_origin, scene.crop_origin + cfg.crop_size};

  TriMesh cropped = crop_scene(scene.room, scene.crop_origin, cfg.crop_size);
  PointCloud cloud = sample_surface(cropped, cfg.points_per_scene, rng);

  // only panes whose slab can actually intersect the crop box
  std::vector<GlassSpec> active;
  for (const auto& g : scene.glass) {
    Vec3 u = g.u_axis();
    Vec3 ext = g.wall_normal * cfg.carve_margin + u * (g.width / 2) +
               Vec3{0, 0, g.height / 2};
    Vec3 lo = g.center - Vec3{std::abs(ext.x), std::abs(ext.y), std::abs(ext.z)};
    Vec3 hi = g.center + Vec3{std::abs(ext.x), std::abs(ext.y), std::abs(ext.z)};
    if (lo.x <= box.max.x && hi.x >= box.min.x && lo.y <= box.max.y &&
        hi.y >= box.min.y && lo.z <= box.max.z && hi.z >= box.min.z)
      active.push_back(g);
  }
  CarveResult carve = carve_glass(cloud, active, cfg.carve_margin);
  if (carve.cutout.empty())
    throw std::runtime_error("make_pair: crop produced no cutout points");

  int n_free = int(std::lround(cfg.points_per_scene * cfg.free_ratio));
  PointCloud free_pts = sample_free_space(box, n_free, cloud, cfg.clearance, rng);

  ScenePair pair;
  pair.seed = scene.seed;
  pair.origin = scene.crop_origin;
  pair.bounds = {{0, 0, 0}, cfg.crop_size};
  for (const auto& g : active) {
    GlassSpec local = g;
    local.center = g.center - scene.crop_origin;
    pair.glass.push_back(local);
  }
  for (const auto& p : carve.surface.points)
    pair.scene_samples.push_back({p - scene.crop_origin, cfg.sigma_max});
  pair.surface_count = pair.scene_samples.size();
  for (const auto& p : free_pts.points)
    pair.scene_samples.push_back({p - scene.crop_origin, 0.0});
  for (const auto& p : carve.cutout.points)
    pair.trans_samples.push_back({p - scene.crop_origin, cfg.sigma_max});
  pair.cutout_count = pair.trans_samples.size();

  auto k_free = std::size_t(std::lround(double(pair.cutout_count) * cfg.trans_neg_free_ratio));
  auto k_surf = std::size_t(std::lround(double(pair.cutout_count) * cfg.trans_neg_surf_ratio));
  append_trans_negatives(pair, k_free, k_surf);
  return pair;
}

std::vector<ScenePair> make_dataset(std::uint64_t master_seed, int count,
                                    const SynthConfig& cfg) {
  std::vector<ScenePair> pairs;
  pairs.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i)
    pairs.push_back(make_pair(generate_scene(master_seed, std::uint64_t(i), cfg), cfg));
  return pairs;
}

void write_dataset(const std::string& dir, const std::vector<ScenePair>& pairs,
                   std::uint64_t master_seed, const SynthConfig& cfg) {
  fs::create_directories(dir);
  json index;
  index["seed"] = master_seed;
  index["count"] = pairs.size();
  index["crop_size"] = to_json(cfg.crop_size);
  index["sigma_max"] = cfg.sigma_max;
  index["scenes"] = json::array();

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ScenePair& pr = pairs[i];
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04zu", i);
    fs::path sdir = fs::path(dir) / name;
    fs::create_directories(sdir);

    PointCloud surf, freep, cut;
    for (std::size_t s = 0; s < pr.surface_count; ++s)
      surf.points.push_back(pr.scene_samples[s].point);
    for (std::size_t s = pr.surface_count; s < pr.scene_samples.size(); ++s)
      freep.points.push_back(pr.scene_samples[s].point);
    for (std::size_t s = 0; s < pr.cutout_count; ++s)
      cut.points.push_back(pr.trans_samples[s].point);
    save_ply((sdir / "scene.ply").string(), surf);
    save_ply((sdir / "free.ply").string(), freep);
    save_ply((sdir / "trans.ply").string(), cut);

    json meta;
    meta["seed"] = pr.seed;
    meta["origin"] = to_json(pr.origin);
    meta["bounds"] = to_json(pr.bounds);
    meta["sigma_max"] = cfg.sigma_max;
    meta["glass"] = json::array();
    for (const auto& g : pr.glass) meta["glass"].push_back(glass_to_json(g));
    meta["counts"] = json{{"surface", pr.surface_count},
                          {"free", freep.points.size()},
                          {"cutout", pr.cutout_count},
                          {"trans_neg_free",
                           std::min(std::size_t(std::lround(double(pr.cutout_count) * cfg.trans_neg_free_ratio)),
                                    freep.points.size())},
                          {"trans_neg_surf",
                           std::size_t(std::lround(double(pr.cutout_count) * cfg.trans_neg_surf_ratio))}};
    std::ofstream mf(sdir / "meta.json");
    mf << meta.dump(2) << "\n";

    index["scenes"].push_back(name);
  }
  std::ofstream idx(fs::path(dir) / "dataset.json");
  idx << index.dump(2) << "\n";
}

std::vector<ScenePair> load_dataset(const std::string& dir) {
  std::ifstream idxf(fs::path(dir) / "dataset.json");
  if (!idxf) throw ParseError(dir + "/dataset.json: cannot open");
  json index;
  idxf >> index;
  double sigma_max = index.at("sigma_max").get<double>();

  std::vector<ScenePair> pairs;
  for (const auto& name : index.at("scenes")) {
    fs::path sdir = fs::path(dir) / name.get<std::string>();
    std::ifstream mf(sdir / "meta.json");
    if (!mf) throw ParseError((sdir / "meta.json").string() + ": cannot open");
    json meta;
    mf >> meta;

    ScenePair pr;
    pr.seed = meta.at("seed").get<std::uint64_t>();
    pr.origin = vec3_from_json(meta.at("origin"));
    pr.bounds = box3_from_json(meta.at("bounds"));
    for (const auto& g : meta.at("glass")) pr.glass.push_back(glass_from_json(g));

    PointCloud surf = load_ply((sdir / "scene.ply").string());
    PointCloud freep = load_ply((sdir / "free.ply").string());
    PointCloud cut = load_ply((sdir / "trans.ply").string());
    for (const auto& p : surf.points) pr.scene_samples.push_back({p, sigma_max});
    pr.surface_count = pr.scene_samples.size();
    for (const auto& p : freep.points) pr.scene_samples.push_back({p, 0.0});
    for (const auto& p : cut.points) pr.trans_samples.push_back({p, sigma_max});
    pr.cutout_count = pr.trans_samples.size();

    std::size_t k_free = meta.at("counts").at("trans_neg_free").get<std::size_t>();
    std::size_t k_surf = meta.at("counts").at("trans_neg_surf").get<std::size_t>();
    append_trans_negatives(pr, k_free, k_surf);
    pairs.push_back(std::move(pr));
  }
  return pairs;
}

}  // namespace vair
