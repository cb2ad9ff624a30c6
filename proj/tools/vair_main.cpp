#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vair/aspp.hpp"
#include "vair/density_grid.hpp"
#include "vair/geometry.hpp"
#include "vair/glo.hpp"
#include "vair/ingest.hpp"
#include "vair/io.hpp"
#include "vair/log.hpp"
#include "vair/metrics.hpp"
#include "vair/pipeline.hpp"
#include "vair/rng.hpp"
#include "vair/sim.hpp"
#include "vair/synthgen.hpp"
#include "vair/threading.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vair;

namespace {

// exit 2: bad flags or config. Everything else that throws is exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One bag for every tunable of every subcommand, defaults matching the
// library's. A single config file can drive a whole pipeline; each command
// reads its slice.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the library default
  std::string out;

  // gen
  int scenes = 64;
  SynthConfig synth;

  // train
  std::string data, resume;
  int epochs = 250;
  double lr = 1e-3;
  int batch = 4096;
  int checkpoint_every = 25;
  int grid = 32;
  int scene_latent = 256;
  int trans_latent = 8;
  std::vector<int> channels{32, 16, 8};
  double sigma_z = 0.01;
  bool arch_given = false;  // grid/latents came from config (mismatch checks)

  // infer
  std::string manifest, checkpoint;
  int iterations = 25;
  double infer_lr = 8e-3;
  ObservationConfig obs;
  double threshold = 85.0;
  std::size_t extract_count = 100000;
  bool aspp_only = false;
  std::optional<Vec3> origin;

  // eval
  std::vector<std::string> pred, gt;
  int voxel_dim = 64;
  std::size_t gt_samples = 500000;
  double bounds_pad = 0.05;
  std::optional<Box3> eval_bounds;

  // sim
  std::uint64_t index = 0;
  double standoff = 2.0, speed = 0.1, overhang = 0.5;
  double frame_hz = 30.0, ping_hz = 10.0;
  int scene_points = 20000;

  bool seed_given = false;
};

const char* kKnownKeys[] = {
    "seed", "threads", "out",
    // gen
    "scenes", "points_per_scene", "free_ratio", "glass_min", "glass_max",
    "carve_margin", "clearance", "trans_neg_free_ratio", "trans_neg_surf_ratio",
    "sigma_max", "room_min", "room_max", "height_min", "height_max",
    "clutter_min", "clutter_max", "crop_size",
    // train
    "data", "resume", "epochs", "lr", "batch", "checkpoint_every", "grid",
    "scene_latent", "trans_latent", "channels", "sigma_z",
    // infer
    "manifest", "checkpoint", "iterations", "infer_lr", "epsilon", "t_max",
    "stride", "spacing", "gate_min", "gate_max", "beam_free", "beam_spacing",
    "beam_start", "beam_stop_frac", "threshold", "extract_count", "aspp_only",
    "origin",
    // eval
    "pred", "gt", "voxel_dim", "gt_samples", "bounds_pad", "bounds",
    // sim
    "index", "standoff", "speed", "overhang", "frame_hz", "ping_hz",
    "scene_points"};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!j.is_object())
    throw UsageError("config file " + path + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kKnownKeys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw UsageError("unknown config key: \"" + it.key() + "\"");
  }
  return j;
}

template <typename T>
void take(const json& cfg, const char* key, T& out) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key \"") + key + "\": " + e.what());
  }
}

Vec3 vec3_of(const std::vector<double>& v, const char* what) {
  if (v.size() != 3)
    throw UsageError(std::string(what) + ": expected exactly 3 numbers");
  return {v[0], v[1], v[2]};
}

RunConfig config_from(const json& cfg) {
  RunConfig rc;
  rc.seed_given = cfg.contains("seed");
  rc.arch_given = cfg.contains("grid") || cfg.contains("scene_latent") ||
                  cfg.contains("trans_latent") || cfg.contains("channels");
  take(cfg, "seed", rc.seed);
  take(cfg, "threads", rc.threads);
  take(cfg, "out", rc.out);

  take(cfg, "scenes", rc.scenes);
  take(cfg, "points_per_scene", rc.synth.points_per_scene);
  take(cfg, "free_ratio", rc.synth.free_ratio);
  take(cfg, "glass_min", rc.synth.glass_min);
  take(cfg, "glass_max", rc.synth.glass_max);
  take(cfg, "carve_margin", rc.synth.carve_margin);
  take(cfg, "trans_neg_free_ratio", rc.synth.trans_neg_free_ratio);
  take(cfg, "trans_neg_surf_ratio", rc.synth.trans_neg_surf_ratio);
  take(cfg, "sigma_max", rc.synth.sigma_max);
  take(cfg, "room_min", rc.synth.room_min);
  take(cfg, "room_max", rc.synth.room_max);
  take(cfg, "height_min", rc.synth.height_min);
  take(cfg, "height_max", rc.synth.height_max);
  take(cfg, "clutter_min", rc.synth.clutter_min);
  take(cfg, "clutter_max", rc.synth.clutter_max);
  if (cfg.contains("crop_size")) {
    std::vector<double> v;
    take(cfg, "crop_size", v);
    rc.synth.crop_size = vec3_of(v, "crop_size");
  }
  if (cfg.contains("clearance")) {
    take(cfg, "clearance", rc.synth.clearance);
    rc.obs.clearance = rc.synth.clearance;
  }

  take(cfg, "data", rc.data);
  take(cfg, "resume", rc.resume);
  take(cfg, "epochs", rc.epochs);
  take(cfg, "lr", rc.lr);
  take(cfg, "batch", rc.batch);
  take(cfg, "checkpoint_every", rc.checkpoint_every);
  take(cfg, "grid", rc.grid);
  take(cfg, "scene_latent", rc.scene_latent);
  take(cfg, "trans_latent", rc.trans_latent);
  take(cfg, "channels", rc.channels);
  take(cfg, "sigma_z", rc.sigma_z);

  take(cfg, "manifest", rc.manifest);
  take(cfg, "checkpoint", rc.checkpoint);
  take(cfg, "iterations", rc.iterations);
  take(cfg, "infer_lr", rc.infer_lr);
  take(cfg, "epsilon", rc.obs.epsilon);
  take(cfg, "t_max", rc.obs.t_max);
  take(cfg, "stride", rc.obs.stride);
  take(cfg, "spacing", rc.obs.spacing);
  take(cfg, "gate_min", rc.obs.gate.min);
  take(cfg, "gate_max", rc.obs.gate.max);
  take(cfg, "beam_free", rc.obs.beam_free);
  take(cfg, "beam_spacing", rc.obs.beam_spacing);
  take(cfg, "beam_start", rc.obs.beam_start);
  take(cfg, "beam_stop_frac", rc.obs.beam_stop_frac);
  take(cfg, "threshold", rc.threshold);
  take(cfg, "extract_count", rc.extract_count);
  take(cfg, "aspp_only", rc.aspp_only);
  if (cfg.contains("origin")) {
    std::vector<double> v;
    take(cfg, "origin", v);
    rc.origin = vec3_of(v, "origin");
  }

  if (cfg.contains("pred")) {
    if (cfg.at("pred").is_string())
      rc.pred = {cfg.at("pred").get<std::string>()};
    else
      take(cfg, "pred", rc.pred);
  }
  if (cfg.contains("gt")) {
    if (cfg.at("gt").is_string())
      rc.gt = {cfg.at("gt").get<std::string>()};
    else
      take(cfg, "gt", rc.gt);
  }
  take(cfg, "voxel_dim", rc.voxel_dim);
  take(cfg, "gt_samples", rc.gt_samples);
  take(cfg, "bounds_pad", rc.bounds_pad);
  if (cfg.contains("bounds")) {
    std::vector<double> v;
    take(cfg, "bounds", v);
    if (v.size() != 6)
      throw UsageError("bounds: expected 6 numbers (min xyz, max xyz)");
    rc.eval_bounds = Box3{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
  }

  take(cfg, "index", rc.index);
  take(cfg, "standoff", rc.standoff);
  take(cfg, "speed", rc.speed);
  take(cfg, "overhang", rc.overhang);
  take(cfg, "frame_hz", rc.frame_hz);
  take(cfg, "ping_hz", rc.ping_hz);
  take(cfg, "scene_points", rc.scene_points);
  return rc;
}

// flag storage + handles, shared across subcommands
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
  CLI::Option *o_seed = nullptr, *o_threads = nullptr, *o_out = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override it");
  f.o_seed = cmd->add_option("--seed", f.seed, "master random seed");
  f.o_threads =
      cmd->add_option("--threads", f.threads, "worker cap; 1 = deterministic");
  f.o_out = cmd->add_option("--out", f.out, "output directory");
}

void apply_common(const CommonFlags& f, RunConfig& rc) {
  if (f.o_seed->count()) {
    rc.seed = f.seed;
    rc.seed_given = true;
  }
  if (f.o_threads->count()) rc.threads = f.threads;
  if (f.o_out->count()) rc.out = f.out;
  if (rc.threads < 0) throw UsageError("--threads must be >= 0");
  if (rc.threads > 0) set_thread_count(rc.threads);
}

void require_out(const RunConfig& rc, const char* cmd) {
  if (rc.out.empty())
    throw UsageError(std::string(cmd) + ": --out is required");
}

json dataset_index(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "dataset.json");
  json j;
  in >> j;
  return j;
}

int run_gen(const RunConfig& rc) {
  require_out(rc, "gen");
  if (rc.scenes < 1) throw UsageError("gen: --scenes must be >= 1");
  if (rc.synth.points_per_scene < 1)
    throw UsageError("gen: points_per_scene must be >= 1");

  std::vector<ScenePair> pairs = make_dataset(rc.seed, rc.scenes, rc.synth);
  write_dataset(rc.out, pairs, rc.seed, rc.synth);
  log_info("gen: wrote ", pairs.size(), " scenes to ", rc.out);
  return 0;
}

int run_train(const RunConfig& rc) {
  require_out(rc, "train");
  if (rc.data.empty()) throw UsageError("train: --data is required");
  if (!fs::exists(fs::path(rc.data) / "dataset.json"))
    throw UsageError("train: no dataset at " + rc.data);
  if (rc.epochs < 0) throw UsageError("train: epochs must be >= 0");

  std::vector<ScenePair> dataset = load_dataset(rc.data);
  if (dataset.empty()) throw UsageError("train: dataset is empty");

  TrainConfig tc;
  tc.epochs = rc.epochs;
  tc.lr = rc.lr;
  tc.batch = rc.batch;
  tc.checkpoint_every = rc.checkpoint_every;
  tc.seed = rc.seed;
  tc.out_dir = rc.out;

  TrainState state;
  if (!rc.resume.empty()) {
    if (!fs::exists(rc.resume))
      throw UsageError("train: resume checkpoint not found: " + rc.resume);
    state = load_checkpoint(rc.resume);
    if (state.scene_codes.size() != dataset.size())
      throw UsageError("train: checkpoint holds " +
                       std::to_string(state.scene_codes.size()) +
                       " scene codes but the dataset has " +
                       std::to_string(dataset.size()));
    if (rc.arch_given && (state.model.cfg.grid != rc.grid ||
                          state.model.cfg.scene_latent != rc.scene_latent ||
                          state.model.cfg.trans_latent != rc.trans_latent))
      throw UsageError(
          "train: config grid/latents disagree with the checkpoint (grid " +
          std::to_string(state.model.cfg.grid) + ", latents " +
          std::to_string(state.model.cfg.scene_latent) + "/" +
          std::to_string(state.model.cfg.trans_latent) + ")");
    if (!rc.seed_given) tc.seed = state.seed;
    log_info("train: resuming at epoch ", state.epoch);
  } else {
    ModelConfig mc;
    mc.scene_latent = rc.scene_latent;
    mc.trans_latent = rc.trans_latent;
    mc.grid = rc.grid;
    mc.channels = rc.channels;
    mc.sigma_z = rc.sigma_z;
    mc.bounds = dataset[0].bounds;
    mc.sigma_max = dataset_index(rc.data).value("sigma_max", mc.sigma_max);
    state = init_train(mc, dataset.size(), rc.seed);
  }

  fs::create_directories(rc.out);
  train(state, dataset, tc);
  log_info("train: done at epoch ", state.epoch, ", model in ", rc.out);
  return 0;
}

int run_infer(const RunConfig& rc) {
  require_out(rc, "infer");
  if (rc.manifest.empty()) throw UsageError("infer: --manifest is required");
  if (!fs::exists(rc.manifest))
    throw UsageError("infer: manifest not found: " + rc.manifest);
  if (!rc.aspp_only && rc.checkpoint.empty())
    throw UsageError("infer: --checkpoint is required unless --aspp-only");
  if (!rc.checkpoint.empty() && !fs::exists(rc.checkpoint))
    throw UsageError("infer: checkpoint not found: " + rc.checkpoint);

  TrainState st;
  ObservationConfig oc = rc.obs;
  oc.seed = rc.seed;
  if (!rc.aspp_only) {
    st = load_checkpoint(rc.checkpoint);
    const ModelConfig& mc = st.model.cfg;
    if (rc.arch_given && (mc.grid != rc.grid ||
                          mc.scene_latent != rc.scene_latent ||
                          mc.trans_latent != rc.trans_latent))
      throw UsageError(
          "infer: config grid/latents disagree with the checkpoint (grid " +
          std::to_string(mc.grid) + ", latents " +
          std::to_string(mc.scene_latent) + "/" +
          std::to_string(mc.trans_latent) + ")");
    oc.bounds = mc.bounds;
    oc.sigma_max = mc.sigma_max;
  }

  Capture cap = load_manifest(rc.manifest);
  AcousticPointCloud apc_world =
      build_apc(cap.frames, cap.pings, cap.trajectory, oc.gate);

  Vec3 origin = rc.origin
                    ? *rc.origin
                    : auto_origin(apc_world.points, cap.scene_cloud, oc.bounds);
  oc.origin = origin;
  log_info("infer: crop origin (", origin.x, ", ", origin.y, ", ", origin.z,
           ")", rc.origin ? "" : " [auto]");

  Observations obs = build_observations(cap, oc);
  fs::create_directories(rc.out);

  save_ply((fs::path(rc.out) / "apc.ply").string(), apc_world.points);
  AsppPoints aspp_world = obs.aspp;
  for (Vec3& p : aspp_world.points.points) p += origin;
  save_aspp_ply((fs::path(rc.out) / "aspp.ply").string(), aspp_world);

  json meta;
  meta["origin"] = {origin.x, origin.y, origin.z};
  meta["counts"] = {{"apc", apc_world.points.points.size()},
                    {"aspp", aspp_world.points.points.size()},
                    {"scene_obs", obs.scene_obs.size()},
                    {"trans_obs", obs.trans_obs.size()}};

  if (rc.aspp_only) {
    save_ply((fs::path(rc.out) / "trans.ply").string(), aspp_world.points);
    meta["mode"] = "aspp-only";
    std::ofstream mo(fs::path(rc.out) / "infer_meta.json");
    mo << meta.dump(2) << "\n";
    log_info("infer: aspp-only, ", aspp_world.points.points.size(),
             " transparent points");
    return 0;
  }

  InferConfig ic;
  ic.iterations = rc.iterations;
  ic.lr = rc.infer_lr;
  ic.seed = rc.seed;
  InferenceResult res = infer(st.model, obs.scene_obs, obs.trans_obs, ic);

  {
    std::ofstream tr(fs::path(rc.out) / "infer_trace.csv");
    tr.precision(17);
    tr << "iter,loss_scene,loss_trans,loss_total\n";
    for (std::size_t i = 0; i < res.trace.size(); ++i)
      tr << i << "," << res.trace[i][0] << "," << res.trace[i][1] << ","
         << res.trace[i][2] << "\n";
  }

  PointCloud trans_pts =
      extract_points(res.trans_field, rc.threshold, rc.extract_count, rc.seed);
  PointCloud scene_pts =
      extract_points(res.scene_field, rc.threshold, rc.extract_count, rc.seed);
  for (Vec3& p : trans_pts.points) p += origin;
  for (Vec3& p : scene_pts.points) p += origin;

  save_ply((fs::path(rc.out) / "trans.ply").string(), trans_pts);
  save_ply((fs::path(rc.out) / "scene.ply").string(), scene_pts);
  save_grid((fs::path(rc.out) / "trans.vgrd").string(), res.trans_field);
  save_grid((fs::path(rc.out) / "scene.vgrd").string(), res.scene_field);

  meta["mode"] = "vair";
  meta["threshold"] = rc.threshold;
  meta["iterations"] = rc.iterations;
  meta["checkpoint"] = rc.checkpoint;
  meta["counts"]["trans_points"] = trans_pts.points.size();
  meta["counts"]["scene_points"] = scene_pts.points.size();
  meta["loss_final"] = {res.trace.back()[0], res.trace.back()[1],
                        res.trace.back()[2]};
  std::ofstream mo(fs::path(rc.out) / "infer_meta.json");
  mo << meta.dump(2) << "\n";

  log_info("infer: ", trans_pts.points.size(), " transparent / ",
           scene_pts.points.size(), " scene points");
  return 0;
}

int run_eval(const RunConfig& rc) {
  if (rc.pred.empty() || rc.gt.empty())
    throw UsageError("eval: --pred and --gt are required");
  if (rc.pred.size() != rc.gt.size())
    throw UsageError("eval: --pred and --gt counts differ");
  for (const std::string& p : rc.pred)
    if (!fs::exists(p)) throw UsageError("eval: missing prediction: " + p);
  for (const std::string& p : rc.gt)
    if (!fs::exists(p)) throw UsageError("eval: missing ground truth: " + p);

  EvalConfig ec;
  ec.voxel_dim = rc.voxel_dim;
  ec.gt_samples = rc.gt_samples;
  ec.seed = rc.seed;
  ec.bounds_pad = rc.bounds_pad;
  const Box3* bounds = rc.eval_bounds ? &*rc.eval_bounds : nullptr;

  std::printf("%s\n", report_table_header().c_str());
  json scenes = json::array();
  MetricReport avg;
  for (std::size_t i = 0; i < rc.pred.size(); ++i) {
    PointCloud pred = load_ply(rc.pred[i]);
    PointCloud gt = load_ply(rc.gt[i]);
    MetricReport r = evaluate(pred, gt, bounds, ec);
    std::string label = fs::path(rc.pred[i]).parent_path().filename().string();
    if (label.empty()) label = fs::path(rc.pred[i]).stem().string();
    std::printf("%s\n", report_table_row(label, r).c_str());
    json row = report_json(r);
    row["name"] = label;
    row["pred"] = rc.pred[i];
    row["gt"] = rc.gt[i];
    scenes.push_back(row);
    avg.iou_masked += r.iou_masked;
    avg.iou_masked_literal += r.iou_masked_literal;
    avg.iou_unmasked += r.iou_unmasked;
    avg.cd_l1 += r.cd_l1;
    avg.cd_l1_x1000 += r.cd_l1_x1000;
    avg.pred_occupied += r.pred_occupied;
    avg.gt_occupied += r.gt_occupied;
  }
  double n = double(rc.pred.size());
  avg.iou_masked /= n;
  avg.iou_masked_literal /= n;
  avg.iou_unmasked /= n;
  avg.cd_l1 /= n;
  avg.cd_l1_x1000 /= n;
  std::printf("%s\n", report_table_row("average", avg).c_str());

  json report;
  report["scenes"] = scenes;
  report["average"] = report_json(avg);
  if (!rc.out.empty()) {
    fs::create_directories(rc.out);
    std::ofstream ro(fs::path(rc.out) / "report.json");
    ro << report.dump(2) << "\n";
    if (!ro) throw std::runtime_error("eval: cannot write report.json");
  }
  return 0;
}

int run_sim(const RunConfig& rc) {
  require_out(rc, "sim");
  if (rc.standoff <= 0 || rc.speed <= 0)
    throw UsageError("sim: standoff and speed must be positive");
  if (rc.frame_hz <= 0 || rc.ping_hz <= 0)
    throw UsageError("sim: frame_hz and ping_hz must be positive");

  GeneratedScene gs = generate_scene(rc.seed, rc.index, rc.synth);
  ScenePair pair = make_pair(gs, rc.synth);
  AnalyticScene scene = analytic_scene(gs);
  std::vector<TimedPose> traj =
      pane_sweep_trajectory(gs, rc.standoff, rc.speed, rc.overhang);

  SimConfig sc;
  sc.seed = substream_seed(rc.seed, "sim", rc.index);
  sc.frame_hz = rc.frame_hz;
  sc.ping_hz = rc.ping_hz;
  sc.scene_points = rc.scene_points;
  sc.gate = rc.obs.gate;
  std::string manifest = simulate_capture(scene, traj, sc, rc.out);

  fs::path gt_dir = fs::path(rc.out) / "gt";
  fs::create_directories(gt_dir);
  PointCloud gt_trans, gt_scene;
  for (std::size_t i = 0; i < pair.cutout_count; ++i)
    gt_trans.points.push_back(pair.trans_samples[i].point + pair.origin);
  for (std::size_t i = 0; i < pair.surface_count; ++i)
    gt_scene.points.push_back(pair.scene_samples[i].point + pair.origin);
  save_ply((gt_dir / "trans.ply").string(), gt_trans);
  save_ply((gt_dir / "scene.ply").string(), gt_scene);

  json meta;
  meta["origin"] = {pair.origin.x, pair.origin.y, pair.origin.z};
  meta["bounds"] = {pair.bounds.min.x, pair.bounds.min.y, pair.bounds.min.z,
                    pair.bounds.max.x, pair.bounds.max.y, pair.bounds.max.z};
  meta["glass_count"] = gs.glass.size();
  meta["manifest"] = manifest;
  std::ofstream mo(gt_dir / "meta.json");
  mo << meta.dump(2) << "\n";

  log_info("sim: capture in ", rc.out, " (", gt_trans.points.size(),
           " gt transparent points)");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "vair: transparent-surface reconstruction from acoustic range returns, "
      "depth geometry, and glass masks"};
  app.require_subcommand(1);

  CommonFlags cf_gen, cf_train, cf_infer, cf_eval, cf_sim;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_common(gen, cf_gen);
  int scenes = 64;
  CLI::Option* o_scenes =
      gen->add_option("--scenes", scenes, "number of scenes");

  CLI::App* train = app.add_subcommand("train", "fit decoders + scene codes");
  add_common(train, cf_train);
  std::string data, resume;
  int epochs = 250, grid = 32;
  CLI::Option* o_data = train->add_option("--data", data, "dataset directory");
  CLI::Option* o_resume =
      train->add_option("--resume", resume, "checkpoint to continue from");
  CLI::Option* o_epochs =
      train->add_option("--epochs", epochs, "total epochs to reach");
  CLI::Option* o_grid =
      train->add_option("--grid", grid, "decoder output resolution");

  CLI::App* infer =
      app.add_subcommand("infer", "reconstruct one capture via a checkpoint");
  add_common(infer, cf_infer);
  std::string manifest, checkpoint;
  double epsilon = 0.15, threshold = 85.0;
  bool aspp_only = false;
  std::vector<double> origin_flag;
  CLI::Option* o_manifest =
      infer->add_option("--manifest", manifest, "capture manifest.json");
  CLI::Option* o_checkpoint =
      infer->add_option("--checkpoint", checkpoint, "trained model .vckp");
  CLI::Option* o_epsilon =
      infer->add_option("--epsilon", epsilon, "pillar support radius, m");
  CLI::Option* o_threshold =
      infer->add_option("--threshold", threshold, "extraction density");
  CLI::Option* o_aspp_only = infer->add_flag(
      "--aspp-only", aspp_only, "emit the planar-projection seed points only");
  CLI::Option* o_origin =
      infer->add_option("--origin", origin_flag, "crop origin, world xyz")
          ->expected(3);

  CLI::App* eval = app.add_subcommand("eval", "score predictions against gt");
  add_common(eval, cf_eval);
  std::vector<std::string> pred, gt;
  CLI::Option* o_pred =
      eval->add_option("--pred", pred, "prediction cloud(s), .ply");
  CLI::Option* o_gt = eval->add_option("--gt", gt, "ground-truth cloud(s), .ply");

  CLI::App* sim = app.add_subcommand("sim", "synthesize a capture fixture");
  add_common(sim, cf_sim);
  std::uint64_t index = 0;
  CLI::Option* o_index =
      sim->add_option("--index", index, "scene index under the master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig rc;
    if (gen->parsed()) {
      rc = config_from(load_config_file(cf_gen.config));
      apply_common(cf_gen, rc);
      if (o_scenes->count()) rc.scenes = scenes;
      return run_gen(rc);
    }
    if (train->parsed()) {
      rc = config_from(load_config_file(cf_train.config));
      apply_common(cf_train, rc);
      if (o_data->count()) rc.data = data;
      if (o_resume->count()) rc.resume = resume;
      if (o_epochs->count()) rc.epochs = epochs;
      if (o_grid->count()) {
        rc.grid = grid;
        rc.arch_given = true;
      }
      return run_train(rc);
    }
    if (infer->parsed()) {
      rc = config_from(load_config_file(cf_infer.config));
      apply_common(cf_infer, rc);
      if (o_manifest->count()) rc.manifest = manifest;
      if (o_checkpoint->count()) rc.checkpoint = checkpoint;
      if (o_epsilon->count()) rc.obs.epsilon = epsilon;
      if (o_threshold->count()) rc.threshold = threshold;
      if (o_aspp_only->count()) rc.aspp_only = aspp_only;
      if (o_origin->count()) rc.origin = vec3_of(origin_flag, "--origin");
      return run_infer(rc);
    }
    if (eval->parsed()) {
      rc = config_from(load_config_file(cf_eval.config));
      apply_common(cf_eval, rc);
      if (o_pred->count()) rc.pred = pred;
      if (o_gt->count()) rc.gt = gt;
      return run_eval(rc);
    }
    if (sim->parsed()) {
      rc = config_from(load_config_file(cf_sim.config));
      apply_common(cf_sim, rc);
      if (o_index->count()) rc.index = index;
      return run_sim(rc);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
