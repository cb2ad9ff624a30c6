#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "vair/glo.hpp"
#include "vair/io.hpp"
#include "vair/json_util.hpp"

namespace vair {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'V', 'C', 'K', 'P'};
constexpr std::uint8_t kVersion = 1;

// live state is stored as float32; rounding before the write keeps an
// in-process continuation identical to a reload
void quantize(std::vector<double>& v) {
  for (double& x : v) x = double(float(x));
}

void write_array(std::ofstream& out, const std::vector<double>& v) {
  for (double x : v) {
    float f = float(x);
    out.write(reinterpret_cast<const char*>(&f), 4);
  }
}

void read_array(std::ifstream& in, std::vector<double>& v, std::size_t count,
                const std::string& path, const std::string& name) {
  v.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    float f;
    in.read(reinterpret_cast<char*>(&f), 4);
    if (!in) throw ParseError(path + ": truncated array '" + name + "'");
    v[i] = double(f);
  }
}

json arrays_manifest(const TrainState& st) {
  auto entry = [](const char* name, std::size_t count) {
    return json{{"name", name}, {"count", count}};
  };
  std::size_t ls = 0, lt = 0;
  for (const auto& c : st.scene_codes) ls += c.size();
  for (const auto& c : st.trans_codes) lt += c.size();
  return json::array({entry("theta", st.model.theta.size()),
                      entry("phi", st.model.phi.size()),
                      entry("scene_codes", ls), entry("trans_codes", lt),
                      entry("adam_m", st.adam_m.size()),
                      entry("adam_v", st.adam_v.size())});
}

}  // namespace

void save_checkpoint(const std::string& path, TrainState& st) {
  quantize(st.model.theta);
  quantize(st.model.phi);
  for (auto& c : st.scene_codes) quantize(c);
  for (auto& c : st.trans_codes) quantize(c);
  quantize(st.adam_m);
  quantize(st.adam_v);

  json header;
  header["model"] = json{{"scene_latent", st.model.cfg.scene_latent},
                         {"trans_latent", st.model.cfg.trans_latent},
                         {"grid", st.model.cfg.grid},
                         {"channels", st.model.cfg.channels},
                         {"sigma_max", st.model.cfg.sigma_max},
                         {"sigma_z", st.model.cfg.sigma_z},
                         {"bounds", to_json(st.model.cfg.bounds)}};
  header["epoch"] = st.epoch;
  header["global_step"] = st.global_step;
  header["weight_steps"] = st.weight_steps;
  header["code_steps"] = st.code_steps;
  header["seed"] = st.seed;
  header["n_scenes"] = st.scene_codes.size();
  header["arrays"] = arrays_manifest(st);
  std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 1);
  std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(hs.data(), std::streamsize(hs.size()));

  write_array(out, st.model.theta);
  write_array(out, st.model.phi);
  for (const auto& c : st.scene_codes) write_array(out, c);
  for (const auto& c : st.trans_codes) write_array(out, c);
  write_array(out, st.adam_m);
  write_array(out, st.adam_v);
  if (!out) throw std::runtime_error("save_checkpoint: write failed: " + path);
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open checkpoint");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError(path + ": bad checkpoint magic");
  std::uint8_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 1);
  if (version != kVersion)
    throw ParseError(path + ": unsupported checkpoint version " +
                     std::to_string(int(version)));
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  if (!in || hlen == 0 || hlen > (1u << 20))
    throw ParseError(path + ": bad checkpoint header length");
  std::string hs(hlen, '\0');
  in.read(hs.data(), std::streamsize(hlen));
  if (!in) throw ParseError(path + ": truncated checkpoint header");

  json header;
  try {
    header = json::parse(hs);
  } catch (const json::exception& e) {
    throw ParseError(path + ": invalid checkpoint header: " + e.what());
  }

  ModelConfig cfg;
  const json& jm = header.at("model");
  cfg.scene_latent = jm.at("scene_latent").get<int>();
  cfg.trans_latent = jm.at("trans_latent").get<int>();
  cfg.grid = jm.at("grid").get<int>();
  cfg.channels = jm.at("channels").get<std::vector<int>>();
  cfg.sigma_max = jm.at("sigma_max").get<double>();
  cfg.sigma_z = jm.at("sigma_z").get<double>();
  cfg.bounds = box3_from_json(jm.at("bounds"));

  TrainState st;
  st.model = Model::shell(cfg);
  st.epoch = header.at("epoch").get<int>();
  st.global_step = header.at("global_step").get<std::int64_t>();
  st.weight_steps = header.at("weight_steps").get<std::int64_t>();
  st.code_steps = header.at("code_steps").get<std::vector<std::int64_t>>();
  st.seed = header.at("seed").get<std::uint64_t>();
  std::size_t n = header.at("n_scenes").get<std::size_t>();
  if (st.code_steps.size() != n)
    throw ParseError(path + ": code_steps count does not match n_scenes");

  auto expect = [&](std::size_t idx, const char* name) {
    const json& a = header.at("arrays").at(idx);
    if (a.at("name").get<std::string>() != name)
      throw ParseError(path + ": unexpected array order, wanted '" +
                       std::string(name) + "'");
    return a.at("count").get<std::size_t>();
  };

  std::size_t c_theta = expect(0, "theta");
  if (c_theta != st.model.theta.size())
    throw ParseError(path + ": theta size does not match the architecture");
  read_array(in, st.model.theta, c_theta, path, "theta");

  std::size_t c_phi = expect(1, "phi");
  if (c_phi != st.model.phi.size())
    throw ParseError(path + ": phi size does not match the architecture");
  read_array(in, st.model.phi, c_phi, path, "phi");

  std::size_t c_zs = expect(2, "scene_codes");
  if (c_zs != n * std::size_t(cfg.scene_latent))
    throw ParseError(path + ": scene code block size mismatch");
  std::vector<double> flat;
  read_array(in, flat, c_zs, path, "scene_codes");
  st.scene_codes.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    st.scene_codes[i] = {flat.begin() + long(i) * cfg.scene_latent,
                         flat.begin() + long(i + 1) * cfg.scene_latent};

  std::size_t c_zt = expect(3, "trans_codes");
  if (c_zt != n * std::size_t(cfg.trans_latent))
    throw ParseError(path + ": transparent code block size mismatch");
  read_array(in, flat, c_zt, path, "trans_codes");
  st.trans_codes.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    st.trans_codes[i] = {flat.begin() + long(i) * cfg.trans_latent,
                         flat.begin() + long(i + 1) * cfg.trans_latent};

  std::size_t moments = st.model.theta.size() + st.model.phi.size() +
                        n * std::size_t(cfg.scene_latent + cfg.trans_latent);
  std::size_t c_m = expect(4, "adam_m");
  std::size_t c_v = expect(5, "adam_v");
  if (c_m != moments || c_v != moments)
    throw ParseError(path + ": optimizer moment block size mismatch");
  read_array(in, st.adam_m, c_m, path, "adam_m");
  read_array(in, st.adam_v, c_v, path, "adam_v");
  return st;
}

std::uint64_t dataset_hash(const std::vector<ScenePair>& dataset) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mixd = [&h](double v) { h = hash_mix(h, std::bit_cast<std::uint64_t>(v)); };
  auto mixset = [&](const DensitySampleSet& set) {
    h = hash_mix(h, set.size());
    for (const auto& s : set) {
      mixd(s.point.x);
      mixd(s.point.y);
      mixd(s.point.z);
      mixd(s.density);
    }
  };
  for (const auto& p : dataset) {
    mixset(p.scene_samples);
    mixset(p.trans_samples);
    h = hash_mix(h, p.surface_count);
    h = hash_mix(h, p.cutout_count);
    mixd(p.bounds.min.x);
    mixd(p.bounds.min.y);
    mixd(p.bounds.min.z);
    mixd(p.bounds.max.x);
    mixd(p.bounds.max.y);
    mixd(p.bounds.max.z);
  }
  return h;
}

void write_model_meta(const std::string& path, const TrainState& st,
                      std::uint64_t data_hash) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(data_hash));
  json meta;
  meta["scene_latent"] = st.model.cfg.scene_latent;
  meta["trans_latent"] = st.model.cfg.trans_latent;
  meta["grid"] = st.model.cfg.grid;
  meta["channels"] = st.model.cfg.channels;
  meta["sigma_max"] = st.model.cfg.sigma_max;
  meta["sigma_z"] = st.model.cfg.sigma_z;
  meta["bounds"] = to_json(st.model.cfg.bounds);
  meta["seed"] = st.seed;
  meta["epoch"] = st.epoch;
  meta["n_scenes"] = st.scene_codes.size();
  meta["dataset_hash"] = hex;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_model_meta: cannot open " + path);
  out << meta.dump(2) << "\n";
}

}  // namespace vair
