#pragma once

#include "uwisac/crb.hpp"
#include "uwisac/types.hpp"

namespace uwisac {

struct RicePair {
  double v_x = 0.0;
  double v_y = 0.0;
  double sigma = 1.0;
};

double rice_pdf(double r, double v, double sigma);

struct SeriesOptions {
  double tol = 1e-8;
  int cap = 400;
};

// Pr(X > Y), X ~ Rice(v_x, sigma), Y ~ Rice(v_y, sigma), by the truncated double series
double pr_rice_greater_exact(const RicePair& pair, SeriesOptions opts = {});

// fitted Gaussian-shape approximation on normalized amplitudes
double pr_rice_greater_empirical(double vx_norm, double vy_norm);
double empirical_f1(double v);
double empirical_f2(double v);

// first-order ratio moments and the normal tail
double pr_rice_greater_gaussian(const RicePair& pair);
double ratio_mean(const RicePair& pair);
double ratio_std(const RicePair& pair);

// empirical branch below v_x/sigma = 30, Gaussian above
double pr_rice_greater(const RicePair& pair);

struct OutlierBound {
  double delay = 0.0;
  double doppler = 0.0;
  int k0 = 0;
  int m0 = 0;
};

// per-dimension Rician noise scale on the channel estimate
double rice_sigma2(FrameKind kind, const FrameConfig& config, const Target& target, double noise_power);

// union bounds over the delay competitors of row m0 and the Doppler competitors of column k0
OutlierBound outlier_ub(FrameKind kind, const FrameConfig& config, const Target& target, double noise_power);

}  // namespace uwisac
