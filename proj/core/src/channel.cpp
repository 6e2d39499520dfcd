#include "uwisac/channel.hpp"

#include <cmath>
#include <string>

#include "uwisac/pulse.hpp"

namespace uwisac {

double max_target_delay(const FrameConfig& config) {
  return config.kind == FrameKind::uw2 ? config.n_cp / 2 : config.n_cp;
}

void Scene::validate(const FrameConfig& config) const {
  if (!(noise_power >= 0.0)) throw ConfigError("noise power must be non-negative");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  const double tmax = max_target_delay(config);
  for (const auto& t : targets) {
    if (!(t.tau >= 0.0 && t.tau < tmax))
      throw ConfigError("target delay " + std::to_string(t.tau) + " outside [0, " + std::to_string(tmax) + ")");
    if (!(std::abs(t.nu) < config.M / 2.0)) throw ConfigError("target Doppler outside (-M/2, M/2)");
    if (t.gain_mag < 0.0) throw ConfigError("gain magnitude must be non-negative");
  }
  if (los.gain_mag > 0.0) {
    if (!(los.tau >= 0.0 && los.tau < 1.0)) throw ConfigError("LoS delay must lie in [0, 1)");
    if (!(std::abs(los.nu) < config.M / 2.0)) throw ConfigError("LoS Doppler outside (-M/2, M/2)");
  }
}

CVec propagate(const CVec& x, const Target& path, const FrameConfig& config) {
  const int N = static_cast<int>(x.size());
  CVec y = CVec::Zero(N);
  if (path.gain_mag == 0.0) return y;
  const int hs = config.rc.half_span;
  const int d = static_cast<int>(std::floor(path.tau));
  const double f = path.tau - d;
  // taps for j in [-hs, hs+1]; |j - f| <= hs
  const int jlo = -hs;
  const int jhi = hs + 1;
  std::vector<double> taps(static_cast<size_t>(jhi - jlo + 1), 0.0);
  for (int j = jlo; j <= jhi; ++j) {
    const double t = j - f;
    if (std::abs(t) <= hs) taps[static_cast<size_t>(j - jlo)] = rc(t, config.rc.alpha);
  }
  const cd* xs = x.data();
  for (int n = 0; n < N; ++n) {
    cd acc(0.0, 0.0);
    const int base = n - d;
    const int j0 = std::max(jlo, base - (N - 1));
    const int j1 = std::min(jhi, base);
    for (int j = j0; j <= j1; ++j) acc += xs[base - j] * taps[static_cast<size_t>(j - jlo)];
    y[n] = acc;
  }
  const double w = -2.0 * kPi * path.nu / config.n_x();
  const cd h = path.gain();
  for (int n = 0; n < N; ++n) y[n] *= h * std::polar(1.0, w * n);
  return y;
}

namespace {

void add_noise(CVec& y, double power, Rng& rng) {
  if (power <= 0.0) return;
  std::normal_distribution<double> nd(0.0, std::sqrt(power / 2.0));
  for (Eigen::Index n = 0; n < y.size(); ++n) {
    const double re = nd(rng);
    const double im = nd(rng);
    y[n] += cd(re, im);
  }
}

}  // namespace

RxStreams simulate_rx(const TxFrame& frame, const Scene& scene, const FrameConfig& config, Rng& rng,
                      SimOptions opts) {
  config.validate();
  scene.validate(config);
  const int N = config.n_x();
  if (frame.target_stream.size() != N || frame.los_stream.size() != N)
    throw ConfigError("frame length does not match configuration");
  CVec echoes = CVec::Zero(N);
  for (const auto& t : scene.targets) echoes += propagate(frame.target_stream, t, config);
  const CVec direct = propagate(frame.los_stream, scene.los, config);

  RxStreams out;
  out.target = echoes;
  if (scene.beta > 0.0) out.target += scene.beta * direct;
  add_noise(out.target, scene.noise_power, rng);
  if (opts.los_stream) {
    out.los = direct;
    if (scene.beta > 0.0) out.los += scene.beta * echoes;
    add_noise(out.los, scene.noise_power, rng);
  }
  return out;
}

int grid_index(FrameKind kind, const FrameConfig& config, int k, int m) {
  const int B = config.block_len();
  switch (kind) {
    case FrameKind::ofdm: return k + config.n_cp + m * B;
    case FrameKind::ps: return k + config.n_cp + m * config.pilot_spacing() * B;
    case FrameKind::uw1: return k + m * B;
    case FrameKind::uw2: return k + config.n_cp / 2 + m * B;
  }
  return 0;
}

SampleGrid sample_grid(const CVec& stream, FrameKind kind, const FrameConfig& config) {
  const FrameConfig c = config.with_kind(kind);
  if (stream.size() != c.n_x()) throw ConfigError("stream length does not match configuration");
  const int L = c.fast_len();
  const int Ms = c.slow_len();
  SampleGrid g;
  g.kind = kind;
  g.data.resize(L, Ms);
  for (int m = 0; m < Ms; ++m) {
    for (int k = 0; k < L; ++k) {
      const int I = grid_index(kind, c, k, m);
      cd v = stream[I];
      if (kind == FrameKind::uw1) v += stream[I + c.n_cp];
      g.data(k, m) = v;
    }
  }
  return g;
}

double l_uw1_expected(const Scene& scene) {
  if (!(scene.noise_power > 0.0)) throw ConfigError("noise power must be positive");
  double p = 0.0;
  for (const auto& t : scene.targets) p += t.gain_mag * t.gain_mag;
  p += scene.beta * scene.beta * scene.los.gain_mag * scene.los.gain_mag;
  return 2.0 + p / scene.noise_power;
}

}  // namespace uwisac
