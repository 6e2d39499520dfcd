#pragma once

#include <vector>

#include "uwisac/frames.hpp"
#include "uwisac/rng.hpp"
#include "uwisac/types.hpp"

namespace uwisac {

struct Target {
  double tau = 0.0;         // samples
  double nu = 0.0;          // full-frame Doppler bins
  double gain_mag = 1.0;
  double gain_phase = 0.0;  // radians

  cd gain() const { return std::polar(gain_mag, gain_phase); }
};

struct Scene {
  std::vector<Target> targets;
  Target los{0.0, 0.0, 0.0, 0.0};
  double beta = 0.0;
  double noise_power = 1.0;

  void validate(const FrameConfig& config) const;
};

struct RxStreams {
  CVec target;
  CVec los;
};

struct SimOptions {
  bool los_stream = true;
};

// delay bound of a target for the frame kind (exclusive)
double max_target_delay(const FrameConfig& config);

// sum over paths of h * exp(-j 2 pi nu n / N_x) * sum_i x[i] rc(n - i - tau), no noise
CVec propagate(const CVec& x, const Target& path, const FrameConfig& config);

RxStreams simulate_rx(const TxFrame& frame, const Scene& scene, const FrameConfig& config, Rng& rng,
                      SimOptions opts = {});

struct SampleGrid {
  CMat data;  // rows: fast time k, cols: slow time m
  FrameKind kind = FrameKind::uw2;
};

// stream index read by grid entry (k, m); UW1 adds the entry at +N_cp
int grid_index(FrameKind kind, const FrameConfig& config, int k, int m);

SampleGrid sample_grid(const CVec& stream, FrameKind kind, const FrameConfig& config);

double l_uw1_expected(const Scene& scene);

}  // namespace uwisac
