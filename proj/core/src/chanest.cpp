#include "uwisac/chanest.hpp"

#include <cmath>

#include "uwisac/fft.hpp"

namespace uwisac {

CMat ChannelEstimate::shifted() const {
  const auto R = data.rows();
  CMat out(R, data.cols());
  const auto half = R / 2;
  for (Eigen::Index i = 0; i < R; ++i) out.row(i) = data.row((i + R - half) % R);
  return out;
}

int ChannelEstimate::signed_row(int r) const {
  const int R = static_cast<int>(data.rows());
  return r >= R / 2 ? r - R : r;
}

CMat reference_matrix(const TxFrame& frame, FrameKind kind, const FrameConfig& config, Stream stream) {
  const FrameConfig c = config.with_kind(kind);
  const int L = c.fast_len();
  const int Ms = c.slow_len();
  CMat D(L, Ms);
  const auto& payload = stream == Stream::target ? frame.target_payload : frame.los_payload;
  switch (kind) {
    case FrameKind::ofdm:
    case FrameKind::ps: {
      const int step = kind == FrameKind::ps ? c.pilot_spacing() : 1;
      if (static_cast<int>(payload.size()) != c.M) throw ConfigError("frame payload does not match configuration");
      for (int m = 0; m < Ms; ++m) D.col(m) = payload[static_cast<size_t>(m * step)];
      break;
    }
    case FrameKind::uw1:
    case FrameKind::uw2: {
      const CVec z = fft::forward(zc_sequence(L));
      for (int m = 0; m < Ms; ++m) D.col(m) = z;
      break;
    }
  }
  return D;
}

ChannelEstimate estimate_channel(const SampleGrid& grid, const CMat& reference) {
  if (reference.rows() != grid.data.rows() || reference.cols() != grid.data.cols())
    throw ConfigError("reference shape does not match the sample grid");
  CMat X = fft::forward_cols(grid.data);
  for (Eigen::Index m = 0; m < X.cols(); ++m) {
    for (Eigen::Index k = 0; k < X.rows(); ++k) {
      const cd d = reference(k, m);
      if (std::abs(d) < 1e-12) throw EqualizationError("zero reference bin");
      X(k, m) /= d;
    }
  }
  const CMat Z = fft::inverse_cols(X);
  ChannelEstimate H;
  H.kind = grid.kind;
  H.data = fft::inverse_cols(Z.transpose());
  return H;
}

ChannelEstimate estimate_channel(const SampleGrid& grid, const TxFrame& frame, const FrameConfig& config,
                                 Stream stream) {
  return estimate_channel(grid, reference_matrix(frame, grid.kind, config, stream));
}

CVec doppler_vector(int M, double nu) {
  if (M < 1) throw ConfigError("M must be positive");
  CVec v(M);
  const double sm = 1.0 / std::sqrt(static_cast<double>(M));
  const cd num = 1.0 - std::polar(1.0, -2.0 * kPi * nu);
  for (int r = 0; r < M; ++r) {
    const cd z = std::polar(1.0, 2.0 * kPi * (r - nu) / M);
    const cd den = 1.0 - z;
    v[r] = std::abs(den) < 1e-9 ? cd(M, 0.0) * sm : num / den * sm;
  }
  return v;
}

}  // namespace uwisac
