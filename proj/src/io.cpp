#include "vair/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace vair {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

std::size_t type_size(const std::string& t, const std::string& path) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  fail(path, "unknown PLY property type '" + t + "'");
}

double read_binary_scalar(std::istream& in, const std::string& t,
                          const std::string& path) {
  char buf[8];
  std::size_t n = type_size(t, path);
  in.read(buf, std::streamsize(n));
  if (!in) fail(path, "truncated binary PLY payload");
  if (t == "float" || t == "float32") {
    float v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  if (t == "double" || t == "float64") {
    double v;
    std::memcpy(&v, buf, 8);
    return v;
  }
  if (t == "char" || t == "int8") return static_cast<std::int8_t>(buf[0]);
  if (t == "uchar" || t == "uint8") return static_cast<std::uint8_t>(buf[0]);
  std::uint64_t raw = 0;
  std::memcpy(&raw, buf, n);
  if (t == "short" || t == "int16") return static_cast<std::int16_t>(raw);
  if (t == "ushort" || t == "uint16") return static_cast<std::uint16_t>(raw);
  if (t == "int" || t == "int32") return static_cast<std::int32_t>(raw);
  return static_cast<std::uint32_t>(raw);
}

}  // namespace

PointCloud load_ply(const std::string& path, std::vector<int>* pillar_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");

  std::string line;
  if (!std::getline(in, line)) fail(path, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") fail(path, "not a PLY file");

  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment") continue;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        fail(path, "unsupported PLY format '" + fmt + "'");
    } else if (tok == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      elements.push_back(el);
    } else if (tok == "property") {
      if (elements.empty()) fail(path, "property before element");
      PlyProperty p;
      ls >> p.type;
      if (p.type == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type;
      }
      ls >> p.name;
      elements.back().props.push_back(p);
    } else if (tok == "end_header") {
      break;
    } else if (tok.empty()) {
      continue;
    } else {
      fail(path, "unrecognized header line '" + line + "'");
    }
  }

  PointCloud cloud;
  if (pillar_ids) pillar_ids->clear();

  for (const auto& el : elements) {
    bool is_vertex = el.name == "vertex";
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, ipid = -1;
    for (std::size_t p = 0; p < el.props.size(); ++p) {
      const auto& name = el.props[p].name;
      if (name == "x") ix = int(p);
      else if (name == "y") iy = int(p);
      else if (name == "z") iz = int(p);
      else if (name == "red") ir = int(p);
      else if (name == "green") ig = int(p);
      else if (name == "blue") ib = int(p);
      else if (name == "pillar_id") ipid = int(p);
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0))
      fail(path, "vertex element lacks x/y/z");
    bool has_rgb = ir >= 0 && ig >= 0 && ib >= 0;

    for (std::size_t row = 0; row < el.count; ++row) {
      std::vector<double> vals(el.props.size(), 0.0);
      if (binary) {
        for (std::size_t p = 0; p < el.props.size(); ++p) {
          const auto& prop = el.props[p];
          if (prop.is_list) {
            double n = read_binary_scalar(in, prop.count_type, path);
            for (int c = 0; c < int(n); ++c) read_binary_scalar(in, prop.type, path);
          } else {
            vals[p] = read_binary_scalar(in, prop.type, path);
          }
        }
      } else {
        if (!std::getline(in, line)) fail(path, "truncated ascii PLY payload");
        std::istringstream ls(line);
        for (std::size_t p = 0; p < el.props.size(); ++p) {
          const auto& prop = el.props[p];
          if (prop.is_list) {
            int n = 0;
            if (!(ls >> n)) fail(path, "malformed list row " + std::to_string(row));
            double dummy;
            for (int c = 0; c < n; ++c) ls >> dummy;
          } else if (!(ls >> vals[p])) {
            fail(path, el.name + " row " + std::to_string(row) + " is malformed");
          }
        }
      }
      if (!is_vertex) continue;
      cloud.points.push_back({vals[ix], vals[iy], vals[iz]});
      if (has_rgb)
        cloud.colors.push_back({std::uint8_t(vals[ir]), std::uint8_t(vals[ig]),
                                std::uint8_t(vals[ib])});
      if (pillar_ids && ipid >= 0) pillar_ids->push_back(int(vals[ipid]));
    }
  }
  return cloud;
}

void save_ply(const std::string& path, const PointCloud& cloud, bool binary,
              const std::vector<int>* pillar_ids) {
  if (pillar_ids && pillar_ids->size() != cloud.points.size())
    throw std::invalid_argument("save_ply: pillar_ids size mismatch");
  if (cloud.has_colors() && cloud.colors.size() != cloud.points.size())
    throw std::invalid_argument("save_ply: colors size mismatch");

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");

  out << "ply\n";
  out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (pillar_ids) out << "property int pillar_id\n";
  out << "end_header\n";
  out.precision(9);

  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    float xyz[3] = {float(cloud.points[i].x), float(cloud.points[i].y),
                    float(cloud.points[i].z)};
    if (binary) {
      out.write(reinterpret_cast<const char*>(xyz), 12);
      if (cloud.has_colors())
        out.write(reinterpret_cast<const char*>(&cloud.colors[i]), 3);
      if (pillar_ids) {
        std::int32_t pid = (*pillar_ids)[i];
        out.write(reinterpret_cast<const char*>(&pid), 4);
      }
    } else {
      out << xyz[0] << " " << xyz[1] << " " << xyz[2];
      if (cloud.has_colors())
        out << " " << int(cloud.colors[i].r) << " " << int(cloud.colors[i].g)
            << " " << int(cloud.colors[i].b);
      if (pillar_ids) out << " " << (*pillar_ids)[i];
      out << "\n";
    }
  }
  if (!out) fail(path, "write failed");
}

DensityGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "VGRD", 4) != 0) fail(path, "bad grid magic");
  char version = 0;
  in.read(&version, 1);
  if (version != 1) fail(path, "unsupported grid version");
  std::uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), 12);
  double bounds[6];
  in.read(reinterpret_cast<char*>(bounds), 48);
  if (!in) fail(path, "truncated grid header");
  Box3 b{{bounds[0], bounds[1], bounds[2]}, {bounds[3], bounds[4], bounds[5]}};
  DensityGrid grid(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                   static_cast<int>(dims[2]), b);
  for (auto& v : grid.values) {
    float f;
    in.read(reinterpret_cast<char*>(&f), 4);
    if (!in) fail(path, "truncated grid payload");
    v = f;
  }
  return grid;
}

void save_grid(const std::string& path, const DensityGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out.write("VGRD", 4);
  char version = 1;
  out.write(&version, 1);
  std::uint32_t dims[3] = {std::uint32_t(grid.nx), std::uint32_t(grid.ny),
                           std::uint32_t(grid.nz)};
  out.write(reinterpret_cast<const char*>(dims), 12);
  double bounds[6] = {grid.bounds.min.x, grid.bounds.min.y, grid.bounds.min.z,
                      grid.bounds.max.x, grid.bounds.max.y, grid.bounds.max.z};
  out.write(reinterpret_cast<const char*>(bounds), 48);
  for (double v : grid.values) {
    float f = float(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  }
  if (!out) fail(path, "write failed");
}

void save_mesh_ply(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices)
    out << float(v.x) << " " << float(v.y) << " " << float(v.z) << "\n";
  for (const auto& f : mesh.faces)
    out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  if (!out) fail(path, "write failed");
}

void save_mesh_obj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  for (const auto& v : mesh.vertices)
    out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  if (!out) fail(path, "write failed");
}

std::vector<PingRow> load_ping_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) fail(path, "empty ping log");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp_s,sensor_id,range_m")
    fail(path, "bad ping CSV header '" + line + "'");

  std::vector<PingRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    PingRow row;
    char c1 = 0, c2 = 0;
    if (!(ls >> row.timestamp >> c1 >> row.sensor_id >> c2 >> row.range) ||
        c1 != ',' || c2 != ',')
      fail(path, "malformed ping row at line " + std::to_string(lineno) + ": '" +
                     line + "'");
    rows.push_back(row);
  }
  return rows;
}

void save_ping_csv(const std::string& path, const std::vector<PingRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << "timestamp_s,sensor_id,range_m\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.timestamp << "," << r.sensor_id << "," << r.range << "\n";
  if (!out) fail(path, "write failed");
}

}  // namespace vair
