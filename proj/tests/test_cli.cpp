#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vair/geometry.hpp"
#include "vair/glo.hpp"
#include "vair/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vair;

namespace {

fs::path tmp_root() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "vair_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
  REQUIRE(bool(out));
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  return slurp(a) == slurp(b);
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
  json j;
  in >> j;
  return j;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

// Runs the CLI through the shell, capturing exit code and both streams.
RunResult run_cli(const std::string& args, const std::string& env = "") {
  static int n = 0;
  fs::path so = tmp_root() / ("cap_out_" + std::to_string(n) + ".txt");
  fs::path se = tmp_root() / ("cap_err_" + std::to_string(n) + ".txt");
  ++n;
  std::string cmd = (env.empty() ? "" : env + " ") + std::string(VAIR_CLI_PATH) +
                    " " + args + " >" + so.string() + " 2>" + se.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

// Skips the header line, returns the requested column of each data row.
std::vector<double> csv_column(const fs::path& p, int col) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::string line;
  REQUIRE(bool(std::getline(in, line)));
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; c <= col; ++c) REQUIRE(bool(std::getline(row, cell, ',')));
    vals.push_back(std::stod(cell));
  }
  return vals;
}

fs::path gen_config() {
  fs::path p = tmp_root() / "gen_cfg.json";
  if (!fs::exists(p)) write_text(p, R"({"points_per_scene": 1200})");
  return p;
}

fs::path train_config() {
  fs::path p = tmp_root() / "train_cfg.json";
  if (!fs::exists(p))
    write_text(p, R"({"grid": 8, "channels": [6, 4], "scene_latent": 4,
                      "trans_latent": 4, "batch": 0, "lr": 0.001})");
  return p;
}

fs::path sim_config() {
  fs::path p = tmp_root() / "sim_cfg.json";
  if (!fs::exists(p)) write_text(p, R"({"speed": 0.4, "scene_points": 3000})");
  return p;
}

// Shared fixtures, built on first use and reused across cases.

fs::path dataset_dir() {
  static fs::path dir = [] {
    fs::path d = tmp_root() / "ds";
    RunResult r = run_cli("gen --scenes 2 --seed 13 --threads 1 --config " +
                          gen_config().string() + " --out " + d.string());
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

fs::path model_dir() {
  static fs::path dir = [] {
    fs::path d = tmp_root() / "model";
    RunResult r = run_cli("train --data " + dataset_dir().string() +
                          " --epochs 24 --seed 5 --threads 1 --config " +
                          train_config().string() + " --out " + d.string());
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

fs::path sim_dir() {
  static fs::path dir = [] {
    fs::path d = tmp_root() / "sim";
    RunResult r = run_cli("sim --seed 11 --index 0 --threads 1 --config " +
                          sim_config().string() + " --out " + d.string());
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

fs::path sim_manifest() { return sim_dir() / "manifest.json"; }

}  // namespace

TEST_CASE("help succeeds and bad invocations exit with usage errors") {
  RunResult help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(contains(help.out, "gen"));
  CHECK(contains(help.out, "infer"));

  CHECK(run_cli("").code == 2);
  CHECK(run_cli("bogus").code == 2);
  CHECK(run_cli("gen --bogus 1").code == 2);
  CHECK(run_cli("infer --manifest m.json --origin 1 2").code == 2);
}

TEST_CASE("config files are validated before running") {
  RunResult missing =
      run_cli("gen --config /nonexistent.json --out " +
              (tmp_root() / "unused").string());
  CHECK(missing.code == 2);
  CHECK(contains(missing.err, "config file not found"));

  fs::path bad = tmp_root() / "bad.json";
  write_text(bad, "{oops");
  RunResult malformed =
      run_cli("gen --config " + bad.string() + " --out " +
              (tmp_root() / "unused").string());
  CHECK(malformed.code == 2);
  CHECK(contains(malformed.err, "config file"));

  fs::path arr = tmp_root() / "arr.json";
  write_text(arr, "[1, 2]");
  RunResult nonobject = run_cli("gen --config " + arr.string() + " --out " +
                                (tmp_root() / "unused").string());
  CHECK(nonobject.code == 2);
  CHECK(contains(nonobject.err, "expected a JSON object"));

  fs::path unk = tmp_root() / "unk.json";
  write_text(unk, R"({"scenes": 2, "bogus_key": 1})");
  RunResult unknown = run_cli("gen --config " + unk.string() + " --out " +
                              (tmp_root() / "unused").string());
  CHECK(unknown.code == 2);
  CHECK(contains(unknown.err, "unknown config key: \"bogus_key\""));

  fs::path wrong = tmp_root() / "wrong_type.json";
  write_text(wrong, R"({"scenes": "three"})");
  RunResult mistyped = run_cli("gen --config " + wrong.string() + " --out " +
                               (tmp_root() / "unused").string());
  CHECK(mistyped.code == 2);
  CHECK(contains(mistyped.err, "config key \"scenes\""));
}

TEST_CASE("gen validates its arguments") {
  RunResult no_out = run_cli("gen --scenes 2");
  CHECK(no_out.code == 2);
  CHECK(contains(no_out.err, "--out is required"));

  RunResult zero =
      run_cli("gen --scenes 0 --out " + (tmp_root() / "unused").string());
  CHECK(zero.code == 2);
  CHECK(contains(zero.err, "--scenes must be >= 1"));

  fs::path cfg = tmp_root() / "pps0.json";
  write_text(cfg, R"({"points_per_scene": 0})");
  RunResult pps = run_cli("gen --scenes 1 --config " + cfg.string() +
                          " --out " + (tmp_root() / "unused").string());
  CHECK(pps.code == 2);
  CHECK(contains(pps.err, "points_per_scene"));
}

TEST_CASE("gen writes a complete dataset layout") {
  fs::path d = dataset_dir();
  CHECK(fs::exists(d / "dataset.json"));
  json idx = load_json(d / "dataset.json");
  CHECK(idx.at("count").get<int>() == 2);
  CHECK(idx.at("seed").get<std::uint64_t>() == 13);
  for (const char* scene : {"scene_0000", "scene_0001"}) {
    CHECK(fs::exists(d / scene / "scene.ply"));
    CHECK(fs::exists(d / scene / "free.ply"));
    CHECK(fs::exists(d / scene / "trans.ply"));
    CHECK(fs::exists(d / scene / "meta.json"));
  }
  CHECK(!fs::exists(d / "scene_0002"));
  CHECK(load_ply((d / "scene_0000" / "scene.ply").string()).points.size() > 0);
}

TEST_CASE("gen flags override config values") {
  fs::path cfg = tmp_root() / "scenes2.json";
  write_text(cfg, R"({"scenes": 2, "points_per_scene": 800})");

  fs::path by_config = tmp_root() / "gen_by_config";
  RunResult a = run_cli("gen --seed 13 --config " + cfg.string() + " --out " +
                        by_config.string());
  CHECK(a.code == 0);
  CHECK(fs::exists(by_config / "scene_0001"));
  CHECK(!fs::exists(by_config / "scene_0002"));

  fs::path by_flag = tmp_root() / "gen_by_flag";
  RunResult b = run_cli("gen --seed 13 --scenes 3 --config " + cfg.string() +
                        " --out " + by_flag.string());
  CHECK(b.code == 0);
  CHECK(fs::exists(by_flag / "scene_0002"));
  CHECK(!fs::exists(by_flag / "scene_0003"));
}

TEST_CASE("gen is deterministic in the seed") {
  fs::path again = tmp_root() / "ds_again";
  RunResult r = run_cli("gen --scenes 2 --seed 13 --threads 1 --config " +
                        gen_config().string() + " --out " + again.string());
  REQUIRE(r.code == 0);
  CHECK(same_bytes(dataset_dir() / "dataset.json", again / "dataset.json"));
  CHECK(same_bytes(dataset_dir() / "scene_0000" / "scene.ply",
                   again / "scene_0000" / "scene.ply"));
  CHECK(same_bytes(dataset_dir() / "scene_0001" / "trans.ply",
                   again / "scene_0001" / "trans.ply"));
  CHECK(same_bytes(dataset_dir() / "scene_0001" / "meta.json",
                   again / "scene_0001" / "meta.json"));

  fs::path other = tmp_root() / "ds_other_seed";
  RunResult o = run_cli("gen --scenes 2 --seed 14 --threads 1 --config " +
                        gen_config().string() + " --out " + other.string());
  REQUIRE(o.code == 0);
  CHECK(!same_bytes(dataset_dir() / "scene_0000" / "scene.ply",
                    other / "scene_0000" / "scene.ply"));
}

TEST_CASE("train validates its arguments") {
  RunResult no_data = run_cli("train --out " + (tmp_root() / "unused").string());
  CHECK(no_data.code == 2);
  CHECK(contains(no_data.err, "--data is required"));

  RunResult no_ds = run_cli("train --data " + (tmp_root() / "nowhere").string() +
                            " --out " + (tmp_root() / "unused").string());
  CHECK(no_ds.code == 2);
  CHECK(contains(no_ds.err, "no dataset at"));

  RunResult no_out = run_cli("train --data " + dataset_dir().string());
  CHECK(no_out.code == 2);

  RunResult neg = run_cli("train --data " + dataset_dir().string() +
                          " --epochs -1 --out " + (tmp_root() / "unused").string());
  CHECK(neg.code == 2);
  CHECK(contains(neg.err, "epochs must be >= 0"));
}

TEST_CASE("train fits a model and records its run") {
  fs::path m = model_dir();
  CHECK(fs::exists(m / "model.vckp"));
  CHECK(fs::exists(m / "model_meta.json"));
  CHECK(fs::exists(m / "train_trace.csv"));

  json meta = load_json(m / "model_meta.json");
  CHECK(meta.at("grid").get<int>() == 8);
  CHECK(meta.at("scene_latent").get<int>() == 4);
  CHECK(meta.at("trans_latent").get<int>() == 4);
  CHECK(meta.at("n_scenes").get<int>() == 2);
  std::string hash = meta.at("dataset_hash").get<std::string>();
  CHECK(hash.size() == 16);
  for (char c : hash) CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));

  std::istringstream trace(slurp(m / "train_trace.csv"));
  std::string header;
  REQUIRE(bool(std::getline(trace, header)));
  CHECK(header == "step,loss_scene,loss_trans,loss_total");
  std::vector<double> total = csv_column(m / "train_trace.csv", 3);
  REQUIRE(total.size() == 48);  // 24 epochs over 2 scenes
  CHECK(total.back() < total.front());
  std::vector<double> steps = csv_column(m / "train_trace.csv", 0);
  CHECK(steps.front() == 0.0);
  CHECK(steps.back() == 47.0);

  TrainState st = load_checkpoint((m / "model.vckp").string());
  CHECK(st.epoch == 24);
  CHECK(st.scene_codes.size() == 2);
  CHECK(st.model.cfg.grid == 8);
}

TEST_CASE("train resume continues the straight run bit for bit") {
  fs::path cfg = tmp_root() / "train_ck2.json";
  write_text(cfg, R"({"grid": 8, "channels": [6, 4], "scene_latent": 4,
                      "trans_latent": 4, "batch": 0, "lr": 0.001,
                      "checkpoint_every": 2})");

  fs::path straight = tmp_root() / "straight";
  REQUIRE(run_cli("train --data " + dataset_dir().string() +
                  " --epochs 4 --seed 5 --threads 1 --config " + cfg.string() +
                  " --out " + straight.string())
              .code == 0);
  CHECK(fs::exists(straight / "ckpt_0002.vckp"));

  fs::path half = tmp_root() / "half";
  REQUIRE(run_cli("train --data " + dataset_dir().string() +
                  " --epochs 2 --seed 5 --threads 1 --config " + cfg.string() +
                  " --out " + half.string())
              .code == 0);
  // Both quantized the identical state after epoch 2.
  CHECK(same_bytes(straight / "ckpt_0002.vckp", half / "model.vckp"));

  fs::path resumed = tmp_root() / "resumed";
  REQUIRE(run_cli("train --data " + dataset_dir().string() + " --resume " +
                  (half / "model.vckp").string() +
                  " --epochs 4 --threads 1 --config " + cfg.string() +
                  " --out " + resumed.string())
              .code == 0);
  CHECK(same_bytes(straight / "model.vckp", resumed / "model.vckp"));
}

TEST_CASE("train resume rejects mismatched architecture and dataset") {
  fs::path big = tmp_root() / "grid16.json";
  write_text(big, R"({"grid": 16})");
  RunResult arch = run_cli("train --data " + dataset_dir().string() +
                           " --resume " + (model_dir() / "model.vckp").string() +
                           " --config " + big.string() + " --out " +
                           (tmp_root() / "unused").string());
  CHECK(arch.code == 2);
  CHECK(contains(arch.err, "disagree with the checkpoint"));

  fs::path ds3 = tmp_root() / "ds3";
  REQUIRE(run_cli("gen --scenes 3 --seed 13 --threads 1 --config " +
                  gen_config().string() + " --out " + ds3.string())
              .code == 0);
  RunResult size = run_cli("train --data " + ds3.string() + " --resume " +
                           (model_dir() / "model.vckp").string() + " --out " +
                           (tmp_root() / "unused").string());
  CHECK(size.code == 2);
  CHECK(contains(size.err, "scene codes"));

  RunResult gone = run_cli("train --data " + dataset_dir().string() +
                           " --resume " + (tmp_root() / "nope.vckp").string() +
                           " --out " + (tmp_root() / "unused").string());
  CHECK(gone.code == 2);
  CHECK(contains(gone.err, "resume checkpoint not found"));
}

TEST_CASE("sim writes a capture bundle with ground truth") {
  fs::path d = sim_dir();
  CHECK(fs::exists(d / "manifest.json"));
  CHECK(fs::exists(d / "pings.csv"));
  CHECK(fs::exists(d / "scene.ply"));
  CHECK(fs::exists(d / "masks" / "frame_0000.png"));
  CHECK(fs::exists(d / "gt" / "trans.ply"));
  CHECK(fs::exists(d / "gt" / "scene.ply"));
  CHECK(fs::exists(d / "gt" / "meta.json"));

  json meta = load_json(d / "gt" / "meta.json");
  CHECK(meta.at("bounds").size() == 6);
  CHECK(meta.at("glass_count").get<int>() >= 1);
  CHECK(contains(meta.at("manifest").get<std::string>(), "manifest.json"));

  CHECK(load_ply((d / "scene.ply").string()).points.size() == 3000);
  CHECK(load_ping_csv((d / "pings.csv").string()).size() > 0);
  CHECK(load_ply((d / "gt" / "trans.ply").string()).points.size() > 0);
}

TEST_CASE("sim validates its arguments") {
  fs::path bad_speed = tmp_root() / "speed.json";
  write_text(bad_speed, R"({"speed": -1.0})");
  RunResult speed = run_cli("sim --config " + bad_speed.string() + " --out " +
                            (tmp_root() / "unused").string());
  CHECK(speed.code == 2);
  CHECK(contains(speed.err, "must be positive"));

  fs::path bad_hz = tmp_root() / "hz.json";
  write_text(bad_hz, R"({"frame_hz": 0.0})");
  RunResult hz = run_cli("sim --config " + bad_hz.string() + " --out " +
                         (tmp_root() / "unused").string());
  CHECK(hz.code == 2);
  CHECK(contains(hz.err, "frame_hz"));
}

TEST_CASE("sim is deterministic in the seed") {
  fs::path again = tmp_root() / "sim_again";
  REQUIRE(run_cli("sim --seed 11 --index 0 --threads 1 --config " +
                  sim_config().string() + " --out " + again.string())
              .code == 0);
  CHECK(same_bytes(sim_dir() / "manifest.json", again / "manifest.json"));
  CHECK(same_bytes(sim_dir() / "pings.csv", again / "pings.csv"));
  CHECK(same_bytes(sim_dir() / "scene.ply", again / "scene.ply"));
  CHECK(same_bytes(sim_dir() / "masks" / "frame_0000.png",
                   again / "masks" / "frame_0000.png"));
}

TEST_CASE("infer validates its arguments") {
  RunResult no_manifest =
      run_cli("infer --out " + (tmp_root() / "unused").string());
  CHECK(no_manifest.code == 2);
  CHECK(contains(no_manifest.err, "--manifest is required"));

  RunResult gone = run_cli("infer --manifest " +
                           (tmp_root() / "nope.json").string() + " --out " +
                           (tmp_root() / "unused").string());
  CHECK(gone.code == 2);
  CHECK(contains(gone.err, "manifest not found"));

  RunResult no_ckpt = run_cli("infer --manifest " + sim_manifest().string() +
                              " --out " + (tmp_root() / "unused").string());
  CHECK(no_ckpt.code == 2);
  CHECK(contains(no_ckpt.err, "--checkpoint is required"));

  RunResult bad_ckpt = run_cli("infer --manifest " + sim_manifest().string() +
                               " --checkpoint " +
                               (tmp_root() / "nope.vckp").string() + " --out " +
                               (tmp_root() / "unused").string());
  CHECK(bad_ckpt.code == 2);
  CHECK(contains(bad_ckpt.err, "checkpoint not found"));

  fs::path big = tmp_root() / "grid16.json";
  write_text(big, R"({"grid": 16})");
  RunResult arch = run_cli("infer --manifest " + sim_manifest().string() +
                           " --checkpoint " +
                           (model_dir() / "model.vckp").string() +
                           " --config " + big.string() + " --out " +
                           (tmp_root() / "unused").string());
  CHECK(arch.code == 2);
  CHECK(contains(arch.err, "disagree with the checkpoint"));
}

TEST_CASE("infer aspp-only emits projection seed points without a model") {
  fs::path d = tmp_root() / "aspp_only";
  RunResult r = run_cli("infer --manifest " + sim_manifest().string() +
                        " --aspp-only --threads 1 --out " + d.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(d / "apc.ply"));
  CHECK(fs::exists(d / "aspp.ply"));
  CHECK(fs::exists(d / "trans.ply"));
  CHECK(fs::exists(d / "infer_meta.json"));
  CHECK(!fs::exists(d / "trans.vgrd"));
  CHECK(!fs::exists(d / "infer_trace.csv"));

  json meta = load_json(d / "infer_meta.json");
  CHECK(meta.at("mode").get<std::string>() == "aspp-only");
  std::size_t n_aspp = meta.at("counts").at("aspp").get<std::size_t>();
  CHECK(load_ply((d / "trans.ply").string()).points.size() == n_aspp);
  CHECK(load_ply((d / "apc.ply").string()).points.size() ==
        meta.at("counts").at("apc").get<std::size_t>());
  CHECK(n_aspp > 0);
}

TEST_CASE("infer reconstructs fields from a checkpoint") {
  fs::path cfg = tmp_root() / "infer_cfg.json";
  write_text(cfg, R"({"iterations": 10, "extract_count": 2000})");
  fs::path d = tmp_root() / "infer_full";
  RunResult r = run_cli("infer --manifest " + sim_manifest().string() +
                        " --checkpoint " + (model_dir() / "model.vckp").string() +
                        " --seed 9 --threads 1 --config " + cfg.string() +
                        " --out " + d.string());
  REQUIRE(r.code == 0);
  for (const char* f : {"apc.ply", "aspp.ply", "trans.ply", "scene.ply",
                        "trans.vgrd", "scene.vgrd", "infer_trace.csv",
                        "infer_meta.json"})
    CHECK(fs::exists(d / f));

  std::istringstream trace(slurp(d / "infer_trace.csv"));
  std::string header;
  REQUIRE(bool(std::getline(trace, header)));
  CHECK(header == "iter,loss_scene,loss_trans,loss_total");
  CHECK(csv_column(d / "infer_trace.csv", 3).size() == 11);

  json meta = load_json(d / "infer_meta.json");
  CHECK(meta.at("mode").get<std::string>() == "vair");
  CHECK(meta.at("iterations").get<int>() == 10);
  CHECK(meta.at("counts").at("scene_obs").get<std::size_t>() > 0);
  CHECK(meta.at("counts").at("trans_obs").get<std::size_t>() > 0);
  for (double v : meta.at("loss_final").get<std::vector<double>>())
    CHECK(std::isfinite(v));

  TrainState st = load_checkpoint((model_dir() / "model.vckp").string());
  DensityGrid g = load_grid((d / "trans.vgrd").string());
  CHECK(g.nx == st.model.cfg.grid);
  CHECK(g.ny == st.model.cfg.grid);
  CHECK(g.nz == st.model.cfg.grid);
  CHECK(g.bounds.min.x == st.model.cfg.bounds.min.x);
  CHECK(g.bounds.max.z == st.model.cfg.bounds.max.z);
  for (double v : g.values) {
    CHECK(v >= 0.0);
    CHECK(v <= st.model.cfg.sigma_max);
  }
}

TEST_CASE("infer is deterministic in the seed") {
  fs::path cfg = tmp_root() / "infer_cfg.json";
  write_text(cfg, R"({"iterations": 10, "extract_count": 2000})");
  fs::path a = tmp_root() / "infer_a";
  fs::path b = tmp_root() / "infer_b";
  for (const fs::path& d : {a, b})
    REQUIRE(run_cli("infer --manifest " + sim_manifest().string() +
                    " --checkpoint " +
                    (model_dir() / "model.vckp").string() +
                    " --seed 9 --threads 1 --config " + cfg.string() +
                    " --out " + d.string())
                .code == 0);
  CHECK(same_bytes(a / "trans.vgrd", b / "trans.vgrd"));
  CHECK(same_bytes(a / "scene.vgrd", b / "scene.vgrd"));
  CHECK(same_bytes(a / "infer_trace.csv", b / "infer_trace.csv"));
  CHECK(same_bytes(a / "trans.ply", b / "trans.ply"));
}

TEST_CASE("eval scores identical clouds perfectly") {
  PointCloud cloud;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k)
        cloud.points.push_back({0.1 + 0.15 * i, 0.1 + 0.15 * j, 0.1 + 0.15 * k});
  fs::path pred = tmp_root() / "pred.ply";
  fs::path gt = tmp_root() / "gt.ply";
  save_ply(pred.string(), cloud);
  save_ply(gt.string(), cloud);

  fs::path d = tmp_root() / "eval_out";
  RunResult r = run_cli("eval --pred " + pred.string() + " --gt " + gt.string() +
                        " --seed 1 --out " + d.string());
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "average"));

  json report = load_json(d / "report.json");
  REQUIRE(report.at("scenes").size() == 1);
  CHECK(report.at("average").at("iou_masked").get<double>() == 1.0);
  CHECK(report.at("average").at("cd_l1").get<double>() == 0.0);
  CHECK(report.at("scenes")[0].at("iou_masked").get<double>() == 1.0);

  fs::path d2 = tmp_root() / "eval_out2";
  RunResult two = run_cli("eval --pred " + pred.string() + " " + pred.string() +
                          " --gt " + gt.string() + " " + gt.string() +
                          " --seed 1 --out " + d2.string());
  REQUIRE(two.code == 0);
  CHECK(load_json(d2 / "report.json").at("scenes").size() == 2);
}

TEST_CASE("eval validates its arguments") {
  fs::path pred = tmp_root() / "pred.ply";

  RunResult none = run_cli("eval");
  CHECK(none.code == 2);
  CHECK(contains(none.err, "--pred and --gt are required"));

  RunResult counts = run_cli("eval --pred " + pred.string() + " --gt " +
                             pred.string() + " " + pred.string());
  CHECK(counts.code == 2);
  CHECK(contains(counts.err, "counts differ"));

  RunResult missing = run_cli("eval --pred " + (tmp_root() / "no.ply").string() +
                              " --gt " + pred.string());
  CHECK(missing.code == 2);
  CHECK(contains(missing.err, "missing prediction"));
}

TEST_CASE("log verbosity follows VAIR_LOG") {
  fs::path cfg = tmp_root() / "tiny_gen.json";
  write_text(cfg, R"({"points_per_scene": 800})");

  fs::path quiet_dir = tmp_root() / "gen_quiet";
  RunResult quiet = run_cli("gen --scenes 1 --seed 13 --config " + cfg.string() +
                            " --out " + quiet_dir.string(),
                            "VAIR_LOG=error");
  CHECK(quiet.code == 0);
  CHECK(quiet.err.empty());

  fs::path loud_dir = tmp_root() / "gen_loud";
  RunResult loud = run_cli("gen --scenes 1 --seed 13 --config " + cfg.string() +
                           " --out " + loud_dir.string());
  CHECK(loud.code == 0);
  CHECK(contains(loud.err, "[info]"));
  CHECK(contains(loud.err, "gen: wrote 1 scenes"));
}
