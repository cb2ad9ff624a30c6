#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vair/density_grid.hpp"
#include "vair/geometry.hpp"
#include "vair/rng.hpp"
#include "vair/samples.hpp"
#include "vair/synthgen.hpp"

namespace vair {

// Decoder stack: affine latent -> C0 x 4^3 feature grid, then stages of
// [x2 nearest upsample -> 3x3x3 conv -> tanh] until the output resolution,
// then a 1x1x1 conv and sigma_max * sigmoid. grid must be 4 * 2^stages.
struct DecoderArch {
  int latent = 0;
  int grid = 32;
  std::vector<int> channels{32, 16, 8};

  int stages() const;
  // feature width entering stage s; s = 0 is the dense output, s = stages()
  // feeds the final 1x1x1 conv
  int width(int s) const;
  std::size_t param_count() const;

  // flat parameter layout offsets
  std::size_t dense_w() const { return 0; }
  std::size_t dense_b() const;
  std::size_t conv_w(int s) const;
  std::size_t conv_b(int s) const;
  std::size_t final_w() const;
  std::size_t final_b() const;

  void validate() const;
};

// weights N(0, 1/sqrt(fan_in)) drawn in layout order, biases zero
void decoder_init(const DecoderArch& arch, Rng& rng, double* w);

// Per-layer activations kept for the backward pass.
struct ForwardCache {
  std::vector<double> latent;
  std::vector<std::vector<double>> post;  // [0] dense out, [1..S] post-tanh
  std::vector<double> density;            // sigma values, x-fastest
};

void decoder_forward(const DecoderArch& arch, const double* w,
                     const double* latent, double sigma_max, ForwardCache& c);

// Accumulates (+=) parameter and latent gradients given dL/ddensity.
void decoder_backward(const DecoderArch& arch, const double* w,
                      const ForwardCache& c, const std::vector<double>& ddensity,
                      double sigma_max, double* dw, double* dlatent);

struct ModelConfig {
  int scene_latent = 256;
  int trans_latent = 8;
  int grid = 32;
  std::vector<int> channels{32, 16, 8};
  double sigma_max = 100.0;
  double sigma_z = 0.01;  // code prior stddev; also scales the regularizer
  Box3 bounds{{0, 0, 0}, {3, 3, 4}};
};

// The two-decoder model. The transparent decoder consumes z_t concatenated
// with z_s, transparent code first.
struct Model {
  ModelConfig cfg;
  DecoderArch scene_arch, trans_arch;
  std::vector<double> theta, phi;

  // architecture + zeroed parameter blocks
  static Model shell(const ModelConfig& cfg);
  // shell with weights drawn from named substreams of seed
  static Model create(const ModelConfig& cfg, std::uint64_t seed);
};

DensityGrid decode_scene(const Model& m, const std::vector<double>& z_s);
DensityGrid decode_trans(const Model& m, const std::vector<double>& z_t,
                         const std::vector<double>& z_s);

// Decode once, then trilinear-sample at each point.
std::vector<double> field_at_scene(const Model& m, const std::vector<double>& z_s,
                                   const std::vector<Vec3>& points);
std::vector<double> field_at_trans(const Model& m, const std::vector<double>& z_t,
                                   const std::vector<double>& z_s,
                                   const std::vector<Vec3>& points);

// Sum of squared residuals over the samples plus the squared-norm code
// regularizer scaled by 1/sigma_z^2. loss_trans regularizes only z_t.
double loss_scene(const Model& m, const std::vector<double>& z_s,
                  const DensitySampleSet& xs);
double loss_trans(const Model& m, const std::vector<double>& z_t,
                  const std::vector<double>& z_s, const DensitySampleSet& xt);

// Both losses and their analytic gradients in one pass. Weight gradients are
// skipped when want_weights is false (frozen-decoder inference).
struct TrainGrads {
  double loss_scene = 0, loss_trans = 0;
  std::vector<double> dtheta, dphi, dz_s, dz_t;
  // portion of dz_s contributed by the transparent loss (via concatenation);
  // already included in dz_s, exposed for per-term normalization
  std::vector<double> dz_s_trans;
};
TrainGrads train_grads(const Model& m, const std::vector<double>& z_s,
                       const std::vector<double>& z_t,
                       const DensitySampleSet& xs, const DensitySampleSet& xt,
                       bool want_weights);

struct TrainConfig {
  int epochs = 250;
  double lr = 1e-3;
  int batch = 4096;          // samples per loss term per step; 0 = full set
  int checkpoint_every = 25; // epochs between checkpoints; 0 = final only
  std::uint64_t seed = 1;
  std::string out_dir;       // checkpoints, trace CSV, metadata ("" = none)
};

struct TrainState {
  Model model;
  std::vector<std::vector<double>> scene_codes, trans_codes;
  std::vector<double> adam_m, adam_v;  // over [theta | phi | codes per scene]
  std::vector<std::int64_t> code_steps;  // per-scene visit counts
  std::int64_t weight_steps = 0;
  std::int64_t global_step = 0;
  int epoch = 0;
  std::uint64_t seed = 0;
};

// Fresh state: decoder weights and codes drawn from named substreams of seed.
TrainState init_train(const ModelConfig& cfg, std::size_t n_scenes,
                      std::uint64_t seed);

// Joint optimization of weights and codes, one scene visit per step, from
// state.epoch up to cfg.epochs. Aborts on non-finite loss naming the scene.
void train(TrainState& state, const std::vector<ScenePair>& dataset,
           const TrainConfig& cfg);

struct InferConfig {
  int iterations = 25;
  double lr = 8e-3;
  std::uint64_t seed = 1;
};

struct InferenceResult {
  std::vector<double> z_s, z_t;
  DensityGrid scene_field, trans_field;
  // literal loss values at iterations 0..iterations
  std::vector<std::array<double, 3>> trace;  // scene, trans, total
};

// Test-time latent optimization: fresh codes, frozen weights, plain gradient
// descent. Each term's gradient is scaled by 1/(count * sigma_max^2) so the
// fixed step size is stable across observation counts and density scales;
// the trace stays literal.
InferenceResult infer(const Model& m, const DensitySampleSet& scene_obs,
                      const DensitySampleSet& trans_obs, const InferConfig& cfg);

// Max relative error between analytic gradients of the combined loss and
// central finite differences. max_coords 0 checks every coordinate; otherwise
// a seeded random subset of that size.
double grad_check(const Model& m, const std::vector<double>& z_s,
                  const std::vector<double>& z_t, const DensitySampleSet& xs,
                  const DensitySampleSet& xt, double delta,
                  std::size_t max_coords = 0, std::uint64_t seed = 0);

// Saving first rounds the live state through float32 (the stored precision),
// so continuing in process after a save matches reloading bit for bit.
void save_checkpoint(const std::string& path, TrainState& state);
TrainState load_checkpoint(const std::string& path);

// Order-sensitive content hash of the supervision data.
std::uint64_t dataset_hash(const std::vector<ScenePair>& dataset);

// Model card: latent sizes, grid, sigma_max, seed, dataset hash.
void write_model_meta(const std::string& path, const TrainState& state,
                      std::uint64_t data_hash);

}  // namespace vair
