#include "uwisac/frames.hpp"

#include <cmath>
#include <string>

#include "uwisac/fft.hpp"

namespace uwisac {

std::string_view to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::ofdm: return "ofdm";
    case FrameKind::ps: return "ps";
    case FrameKind::uw1: return "uw1";
    case FrameKind::uw2: return "uw2";
  }
  return "?";
}

FrameKind parse_kind(std::string_view name) {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  throw ConfigError("unknown frame kind '" + std::string(name) + "'");
}

bool is_supported_qam(int order) {
  return order == 4 || order == 16 || order == 64 || order == 256 || order == 1024;
}

void FrameConfig::validate() const {
  if (K < 2) throw ConfigError("K must be at least 2");
  if (n_cp <= 0 || n_cp % 2 != 0) throw ConfigError("N_cp must be positive and even");
  if (n_cp >= K) throw ConfigError("N_cp must be smaller than K");
  if (M < 2) throw ConfigError("M must be at least 2");
  if (kind == FrameKind::ps) {
    if (M_p < 2) throw ConfigError("M_p must be at least 2");
    if (M % M_p != 0) throw ConfigError("M_p must divide M");
  }
  if (!is_supported_qam(qam_order)) throw ConfigError("unsupported QAM order " + std::to_string(qam_order));
  if (!(rc.alpha > 0.0 && rc.alpha <= 1.0)) throw ConfigError("roll-off must lie in (0, 1]");
  if (rc.half_span < 1) throw ConfigError("RC half span must be positive");
}

int FrameConfig::fast_len() const {
  switch (kind) {
    case FrameKind::ofdm:
    case FrameKind::ps: return K;
    case FrameKind::uw1: return n_cp;
    case FrameKind::uw2: return n_cp / 2;
  }
  return K;
}

int FrameConfig::slow_len() const { return kind == FrameKind::ps ? M_p : M; }

int FrameConfig::search_len() const { return kind == FrameKind::uw2 ? n_cp / 2 : n_cp; }

FrameConfig link_config(FrameKind kind) {
  FrameConfig c;
  c.K = 128;
  c.n_cp = 32;
  c.M = 64;
  c.M_p = 8;
  c.qam_order = 256;
  c.kind = kind;
  return c;
}

FrameConfig system_config(FrameKind kind) {
  FrameConfig c;
  c.K = 1024;
  c.n_cp = 204;
  c.M = 140;
  c.M_p = 20;
  c.qam_order = 256;
  c.kind = kind;
  return c;
}

namespace {

std::vector<double> qam_levels(int order) {
  if (!is_supported_qam(order)) throw ConfigError("unsupported QAM order " + std::to_string(order));
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
  std::vector<double> lv(static_cast<size_t>(side));
  for (int i = 0; i < side; ++i) lv[static_cast<size_t>(i)] = (2.0 * i - side + 1) * scale;
  return lv;
}

CVec random_pilot(int K, Rng& rng, RVec& signs) {
  std::bernoulli_distribution coin(0.5);
  signs.resize(K);
  CVec p(K);
  for (int k = 0; k < K; ++k) {
    signs[k] = coin(rng) ? 1.0 : -1.0;
    p[k] = signs[k];
  }
  return p;
}

}  // namespace

CVec gen_qam_symbols(int count, int order, Rng& rng) {
  const auto lv = qam_levels(order);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(lv.size()) - 1);
  CVec d(count);
  for (int i = 0; i < count; ++i) {
    const double re = lv[static_cast<size_t>(pick(rng))];
    const double im = lv[static_cast<size_t>(pick(rng))];
    d[i] = cd(re, im);
  }
  return d;
}

CVec zc_sequence(int length) {
  if (length < 1) throw ConfigError("ZC length must be positive");
  CVec x(length);
  for (int n = 0; n < length; ++n) {
    const double nn = static_cast<double>(n);
    x[n] = std::polar(1.0, -kPi * nn * nn / length);
  }
  return x;
}

CVec build_subblock(const FrameConfig& config, const CVec& payload, FrameKind kind) {
  const int K = config.K;
  const int ncp = config.n_cp;
  if (payload.size() != K) throw ConfigError("payload length must equal K");
  CVec body = fft::inverse(payload);
  CVec out(K + ncp);
  switch (kind) {
    case FrameKind::ofdm:
    case FrameKind::ps:
      out.head(ncp) = body.tail(ncp);
      break;
    case FrameKind::uw1:
      out.head(ncp) = zc_sequence(ncp);
      break;
    case FrameKind::uw2: {
      const CVec half = zc_sequence(ncp / 2);
      out.segment(0, ncp / 2) = half;
      out.segment(ncp / 2, ncp / 2) = half;
      break;
    }
  }
  out.tail(K) = body;
  return out;
}

std::vector<int> pilot_indexes(const FrameConfig& config) {
  std::vector<int> idx;
  const int step = config.pilot_spacing();
  for (int m = 0; m < config.M; m += step) idx.push_back(m);
  return idx;
}

TxFrame build_frame(const FrameConfig& config, Rng& rng) {
  config.validate();
  const int K = config.K;
  const int B = config.block_len();
  TxFrame f;
  f.kind = config.kind;
  f.target_stream = CVec::Zero(config.n_x());
  f.los_stream = CVec::Zero(config.n_x());
  f.target_payload.resize(static_cast<size_t>(config.M));
  f.los_payload.resize(static_cast<size_t>(config.M));
  const bool ps = config.kind == FrameKind::ps;
  const int step = ps ? config.pilot_spacing() : 0;
  for (int m = 0; m < config.M; ++m) {
    const auto mi = static_cast<size_t>(m);
    if (ps && m % step == 0) {
      RVec signs;
      CVec p = random_pilot(K, rng, signs);
      f.pilots.push_back(signs);
      f.target_payload[mi] = p;
      f.los_payload[mi] = p;
    } else {
      f.target_payload[mi] = gen_qam_symbols(K, config.qam_order, rng);
      f.los_payload[mi] = gen_qam_symbols(K, config.qam_order, rng);
    }
    f.target_stream.segment(m * B, B) = build_subblock(config, f.target_payload[mi], config.kind);
    f.los_stream.segment(m * B, B) = build_subblock(config, f.los_payload[mi], config.kind);
  }
  return f;
}

TxFrame reference_frame(const FrameConfig& config) {
  config.validate();
  const int K = config.K;
  const int B = config.block_len();
  TxFrame f;
  f.kind = config.kind;
  f.target_stream = CVec::Zero(config.n_x());
  f.target_payload.assign(static_cast<size_t>(config.M), CVec::Zero(K));
  const bool flat_payload = config.kind == FrameKind::ofdm || config.kind == FrameKind::ps;
  const CVec zc_f = fft::forward(zc_sequence(K));
  for (int m = 0; m < config.M; ++m) {
    const auto mi = static_cast<size_t>(m);
    if (flat_payload) f.target_payload[mi] = zc_f;
    CVec sb = build_subblock(config, f.target_payload[mi], config.kind);
    if (config.kind == FrameKind::ps && m % config.pilot_spacing() != 0) sb.setZero();
    f.target_stream.segment(m * B, B) = sb;
  }
  f.los_stream = f.target_stream;
  f.los_payload = f.target_payload;
  return f;
}

double l_ofdm(int order) {
  const auto lv = qam_levels(order);
  double acc = 0.0;
  for (double a : lv)
    for (double b : lv) acc += 1.0 / (a * a + b * b);
  return acc / static_cast<double>(lv.size() * lv.size());
}

double data_rate_loss(FrameKind kind, int M, int M_p) {
  if (kind != FrameKind::ps) return 0.0;
  if (M <= 0 || M_p <= 0) throw ConfigError("M and M_p must be positive");
  return static_cast<double>(M_p) / static_cast<double>(M);
}

}  // namespace uwisac
