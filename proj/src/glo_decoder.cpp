#include "vair/glo.hpp"

#include <cmath>
#include <stdexcept>

#include "vair/threading.hpp"

namespace vair {

namespace {

constexpr int kBase = 4;  // dense output resolution per axis

// 3x3x3 offsets enumerated kz-major, matching the weight layout
inline void kernel_offset(int k, int& dz, int& dy, int& dx) {
  dz = k / 9 - 1;
  dy = (k / 3) % 3 - 1;
  dx = k % 3 - 1;
}

void upsample2(const std::vector<double>& in, int channels, int rin,
               std::vector<double>& out) {
  int rout = rin * 2;
  std::size_t vin = std::size_t(rin) * rin * rin;
  std::size_t vout = std::size_t(rout) * rout * rout;
  out.assign(std::size_t(channels) * vout, 0.0);
  parallel_for(std::size_t(channels), [&](std::size_t c) {
    const double* src = in.data() + c * vin;
    double* dst = out.data() + c * vout;
    for (int z = 0; z < rout; ++z)
      for (int y = 0; y < rout; ++y) {
        const double* row = src + (std::size_t(z >> 1) * rin + (y >> 1)) * rin;
        double* orow = dst + (std::size_t(z) * rout + y) * rout;
        for (int x = 0; x < rout; ++x) orow[x] = row[x >> 1];
      }
  });
}

// out[oc] = b[oc] + sum_ic conv3(in[ic]); zero padding, stride 1
void conv3_forward(const std::vector<double>& in, int win, int wout, int r,
                   const double* w, const double* b, std::vector<double>& out) {
  std::size_t vol = std::size_t(r) * r * r;
  out.assign(std::size_t(wout) * vol, 0.0);
  parallel_for(std::size_t(wout), [&](std::size_t oc) {
    double* dst = out.data() + oc * vol;
    for (std::size_t v = 0; v < vol; ++v) dst[v] = b[oc];
    for (int ic = 0; ic < win; ++ic) {
      const double* src = in.data() + std::size_t(ic) * vol;
      const double* wk = w + (oc * win + ic) * 27;
      for (int k = 0; k < 27; ++k) {
        double wv = wk[k];
        if (wv == 0.0) continue;
        int dz, dy, dx;
        kernel_offset(k, dz, dy, dx);
        int z0 = std::max(0, -dz), z1 = std::min(r, r - dz);
        int y0 = std::max(0, -dy), y1 = std::min(r, r - dy);
        int x0 = std::max(0, -dx), x1 = std::min(r, r - dx);
        for (int z = z0; z < z1; ++z)
          for (int y = y0; y < y1; ++y) {
            const double* srow =
                src + (std::size_t(z + dz) * r + (y + dy)) * r + (x0 + dx);
            double* drow = dst + (std::size_t(z) * r + y) * r + x0;
            for (int x = 0; x < x1 - x0; ++x) drow[x] += wv * srow[x];
          }
      }
    }
  });
}

// dW[oc][ic][k] += sum_v dout[oc][v] * in[ic][v + k]; db[oc] += sum dout[oc]
void conv3_backward_params(const std::vector<double>& in,
                           const std::vector<double>& dout, int win, int wout,
                           int r, double* dw, double* db) {
  std::size_t vol = std::size_t(r) * r * r;
  parallel_for(std::size_t(wout), [&](std::size_t oc) {
    const double* dsrc = dout.data() + oc * vol;
    double acc_b = 0;
    for (std::size_t v = 0; v < vol; ++v) acc_b += dsrc[v];
    db[oc] += acc_b;
    for (int ic = 0; ic < win; ++ic) {
      const double* src = in.data() + std::size_t(ic) * vol;
      double* wk = dw + (oc * win + ic) * 27;
      for (int k = 0; k < 27; ++k) {
        int dz, dy, dx;
        kernel_offset(k, dz, dy, dx);
        int z0 = std::max(0, -dz), z1 = std::min(r, r - dz);
        int y0 = std::max(0, -dy), y1 = std::min(r, r - dy);
        int x0 = std::max(0, -dx), x1 = std::min(r, r - dx);
        double acc = 0;
        for (int z = z0; z < z1; ++z)
          for (int y = y0; y < y1; ++y) {
            const double* srow =
                src + (std::size_t(z + dz) * r + (y + dy)) * r + (x0 + dx);
            const double* drow = dsrc + (std::size_t(z) * r + y) * r + x0;
            for (int x = 0; x < x1 - x0; ++x) acc += drow[x] * srow[x];
          }
        wk[k] += acc;
      }
    }
  });
}

// din[ic][v + k] += W[oc][ic][k] * dout[oc][v]
void conv3_backward_data(const std::vector<double>& dout, int win, int wout,
                         int r, const double* w, std::vector<double>& din) {
  std::size_t vol = std::size_t(r) * r * r;
  din.assign(std::size_t(win) * vol, 0.0);
  parallel_for(std::size_t(win), [&](std::size_t ic) {
    double* dst = din.data() + ic * vol;
    for (int oc = 0; oc < wout; ++oc) {
      const double* dsrc = dout.data() + std::size_t(oc) * vol;
      const double* wk = w + (std::size_t(oc) * win + ic) * 27;
      for (int k = 0; k < 27; ++k) {
        double wv = wk[k];
        if (wv == 0.0) continue;
        int dz, dy, dx;
        kernel_offset(k, dz, dy, dx);
        int z0 = std::max(0, -dz), z1 = std::min(r, r - dz);
        int y0 = std::max(0, -dy), y1 = std::min(r, r - dy);
        int x0 = std::max(0, -dx), x1 = std::min(r, r - dx);
        for (int z = z0; z < z1; ++z)
          for (int y = y0; y < y1; ++y) {
            double* drow =
                dst + (std::size_t(z + dz) * r + (y + dy)) * r + (x0 + dx);
            const double* srow = dsrc + (std::size_t(z) * r + y) * r + x0;
            for (int x = 0; x < x1 - x0; ++x) drow[x] += wv * srow[x];
          }
      }
    }
  });
}

void upsample2_backward(const std::vector<double>& dout, int channels, int rin,
                        std::vector<double>& din) {
  int rout = rin * 2;
  std::size_t vin = std::size_t(rin) * rin * rin;
  std::size_t vout = std::size_t(rout) * rout * rout;
  din.assign(std::size_t(channels) * vin, 0.0);
  parallel_for(std::size_t(channels), [&](std::size_t c) {
    const double* src = dout.data() + c * vout;
    double* dst = din.data() + c * vin;
    for (int z = 0; z < rout; ++z)
      for (int y = 0; y < rout; ++y) {
        const double* srow = src + (std::size_t(z) * rout + y) * rout;
        double* drow = dst + (std::size_t(z >> 1) * rin + (y >> 1)) * rin;
        for (int x = 0; x < rout; ++x) drow[x >> 1] += srow[x];
      }
  });
}

}  // namespace

int DecoderArch::stages() const {
  int s = 0, r = kBase;
  while (r < grid) {
    r *= 2;
    ++s;
  }
  return s;
}

int DecoderArch::width(int s) const {
  if (channels.empty()) throw std::invalid_argument("DecoderArch: no channels");
  return channels[std::min<std::size_t>(std::size_t(s), channels.size() - 1)];
}

void DecoderArch::validate() const {
  if (latent < 1) throw std::invalid_argument("DecoderArch: latent must be >= 1");
  if (channels.empty()) throw std::invalid_argument("DecoderArch: no channels");
  for (int c : channels)
    if (c < 1) throw std::invalid_argument("DecoderArch: channel widths must be >= 1");
  int r = kBase << stages();
  if (r != grid)
    throw std::invalid_argument("DecoderArch: grid must be 4 * 2^stages");
}

std::size_t DecoderArch::dense_b() const {
  return std::size_t(latent) * width(0) * kBase * kBase * kBase;
}

std::size_t DecoderArch::conv_w(int s) const {
  std::size_t off = dense_b() + std::size_t(width(0)) * kBase * kBase * kBase;
  for (int i = 0; i < s; ++i)
    off += std::size_t(width(i)) * width(i + 1) * 27 + width(i + 1);
  return off;
}

std::size_t DecoderArch::conv_b(int s) const {
  return conv_w(s) + std::size_t(width(s)) * width(s + 1) * 27;
}

std::size_t DecoderArch::final_w() const { return conv_w(stages()); }

std::size_t DecoderArch::final_b() const {
  return final_w() + std::size_t(width(stages()));
}

std::size_t DecoderArch::param_count() const { return final_b() + 1; }

void decoder_init(const DecoderArch& arch, Rng& rng, double* w) {
  arch.validate();
  int S = arch.stages();
  std::size_t n0 = std::size_t(arch.width(0)) * kBase * kBase * kBase;

  double sd = 1.0 / std::sqrt(double(arch.latent));
  for (std::size_t i = 0; i < n0 * std::size_t(arch.latent); ++i)
    w[arch.dense_w() + i] = rng.normal(0.0, sd);
  for (std::size_t i = 0; i < n0; ++i) w[arch.dense_b() + i] = 0.0;

  for (int s = 0; s < S; ++s) {
    int win = arch.width(s), wout = arch.width(s + 1);
    double sc = 1.0 / std::sqrt(27.0 * win);
    for (std::size_t i = 0; i < std::size_t(wout) * win * 27; ++i)
      w[arch.conv_w(s) + i] = rng.normal(0.0, sc);
    for (int i = 0; i < wout; ++i) w[arch.conv_b(s) + i] = 0.0;
  }

  int wS = arch.width(S);
  double sf = 1.0 / std::sqrt(double(wS));
  for (int i = 0; i < wS; ++i) w[arch.final_w() + i] = rng.normal(0.0, sf);
  w[arch.final_b()] = 0.0;
}

void decoder_forward(const DecoderArch& arch, const double* w,
                     const double* latent, double sigma_max, ForwardCache& c) {
  int S = arch.stages();
  int L = arch.latent;
  std::size_t n0 = std::size_t(arch.width(0)) * kBase * kBase * kBase;

  c.latent.assign(latent, latent + L);
  c.post.assign(std::size_t(S) + 1, {});

  c.post[0].resize(n0);
  {
    const double* dw = w + arch.dense_w();
    const double* db = w + arch.dense_b();
    parallel_for(n0, [&](std::size_t i) {
      const double* row = dw + i * std::size_t(L);
      double acc = db[i];
      for (int j = 0; j < L; ++j) acc += row[j] * latent[j];
      c.post[0][i] = acc;
    });
  }

  std::vector<double> up;
  for (int s = 0; s < S; ++s) {
    int rin = kBase << s, rout = rin * 2;
    upsample2(c.post[std::size_t(s)], arch.width(s), rin, up);
    conv3_forward(up, arch.width(s), arch.width(s + 1), rout,
                  w + arch.conv_w(s), w + arch.conv_b(s),
                  c.post[std::size_t(s) + 1]);
    auto& h = c.post[std::size_t(s) + 1];
    parallel_for(h.size(), [&](std::size_t i) { h[i] = std::tanh(h[i]); });
  }

  int r = arch.grid;
  std::size_t vol = std::size_t(r) * r * r;
  int wS = arch.width(S);
  const double* fw = w + arch.final_w();
  double fb = w[arch.final_b()];
  const auto& h = c.post[std::size_t(S)];
  c.density.assign(vol, 0.0);
  parallel_for(vol, [&](std::size_t v) {
    double q = fb;
    for (int ch = 0; ch < wS; ++ch) q += fw[ch] * h[std::size_t(ch) * vol + v];
    c.density[v] = sigma_max / (1.0 + std::exp(-q));
  });
}

void decoder_backward(const DecoderArch& arch, const double* w,
                      const ForwardCache& c, const std::vector<double>& ddensity,
                      double sigma_max, double* dw, double* dlatent) {
  int S = arch.stages();
  int r = arch.grid;
  std::size_t vol = std::size_t(r) * r * r;
  int wS = arch.width(S);

  // output activation: sigma = sigma_max * sig(q)
  std::vector<double> dq(vol);
  parallel_for(vol, [&](std::size_t v) {
    double sig = c.density[v] / sigma_max;
    dq[v] = ddensity[v] * sigma_max * sig * (1.0 - sig);
  });

  const auto& hS = c.post[std::size_t(S)];
  const double* fw = w + arch.final_w();
  if (dw) {
    parallel_for(std::size_t(wS), [&](std::size_t ch) {
      double acc = 0;
      const double* hrow = hS.data() + ch * vol;
      for (std::size_t v = 0; v < vol; ++v) acc += dq[v] * hrow[v];
      dw[arch.final_w() + ch] += acc;
    });
    double accb = 0;
    for (std::size_t v = 0; v < vol; ++v) accb += dq[v];
    dw[arch.final_b()] += accb;
  }

  std::vector<double> dh(std::size_t(wS) * vol);
  parallel_for(std::size_t(wS), [&](std::size_t ch) {
    double* row = dh.data() + ch * vol;
    double wv = fw[ch];
    for (std::size_t v = 0; v < vol; ++v) row[v] = wv * dq[v];
  });

  std::vector<double> up, du, da;
  for (int s = S - 1; s >= 0; --s) {
    int rin = kBase << s, rout = rin * 2;
    const auto& h = c.post[std::size_t(s) + 1];
    // through tanh
    parallel_for(dh.size(), [&](std::size_t i) { dh[i] *= 1.0 - h[i] * h[i]; });

    upsample2(c.post[std::size_t(s)], arch.width(s), rin, up);
    if (dw)
      conv3_backward_params(up, dh, arch.width(s), arch.width(s + 1), rout,
                            dw + arch.conv_w(s), dw + arch.conv_b(s));
    conv3_backward_data(dh, arch.width(s), arch.width(s + 1), rout,
                        w + arch.conv_w(s), du);
    upsample2_backward(du, arch.width(s), rin, da);
    dh = std::move(da);
    da.clear();
  }

  // dense layer
  int L = arch.latent;
  std::size_t n0 = std::size_t(arch.width(0)) * kBase * kBase * kBase;
  if (dw) {
    double* dwd = dw + arch.dense_w();
    parallel_for(n0, [&](std::size_t i) {
      double g = dh[i];
      double* row = dwd + i * std::size_t(L);
      for (int j = 0; j < L; ++j) row[j] += g * c.latent[std::size_t(j)];
      dw[arch.dense_b() + i] += g;
    });
  }
  if (dlatent) {
    const double* wd = w + arch.dense_w();
    for (std::size_t i = 0; i < n0; ++i) {
      const double* row = wd + i * std::size_t(L);
      double g = dh[i];
      for (int j = 0; j < L; ++j) dlatent[j] += g * row[j];
    }
  }
}

Model Model::shell(const ModelConfig& cfg) {
  Model m;
  m.cfg = cfg;
  m.scene_arch = {cfg.scene_latent, cfg.grid, cfg.channels};
  m.trans_arch = {cfg.trans_latent + cfg.scene_latent, cfg.grid, cfg.channels};
  m.scene_arch.validate();
  m.trans_arch.validate();
  m.theta.assign(m.scene_arch.param_count(), 0.0);
  m.phi.assign(m.trans_arch.param_count(), 0.0);
  return m;
}

Model Model::create(const ModelConfig& cfg, std::uint64_t seed) {
  Model m = shell(cfg);
  Rng rs = substream(seed, "weights-scene");
  decoder_init(m.scene_arch, rs, m.theta.data());
  Rng rt = substream(seed, "weights-trans");
  decoder_init(m.trans_arch, rt, m.phi.data());
  return m;
}

}  // namespace vair
