#pragma once

#include <vector>

#include "uwisac/channel.hpp"
#include "uwisac/frames.hpp"
#include "uwisac/types.hpp"

namespace uwisac {

// theta_p = (tau, nu, |h|, arg h), stored as Target records
using ParamVector = std::vector<Target>;

// noiseless grid for the parameters; the frame defaults to reference_frame(config)
SampleGrid noiseless_signal(const ParamVector& theta, FrameKind kind, const FrameConfig& config,
                            const TxFrame* frame = nullptr);

// partial derivatives of the grid w.r.t. each of the 4P parameters, flattened column-major
std::vector<CVec> signal_partials(const ParamVector& theta, FrameKind kind, const FrameConfig& config,
                                  const TxFrame* frame = nullptr);

// noise power on the grid after the receiver's own processing:
// sigma^2 L_ofdm (OFDM), sigma^2 (2 + sum|h|^2/sigma^2) (UW1), sigma^2 otherwise
double effective_noise(const ParamVector& theta, FrameKind kind, const FrameConfig& config, double noise_power);

RMat fisher_matrix(const ParamVector& theta, FrameKind kind, const FrameConfig& config, double noise_power,
                   const TxFrame* frame = nullptr);

struct CrbResult {
  std::vector<double> delay;    // variance bounds, samples^2
  std::vector<double> doppler;  // bins^2
  double condition_number = 0.0;
};

CrbResult crb(const ParamVector& theta, FrameKind kind, const FrameConfig& config, double noise_power,
              const TxFrame* frame = nullptr);

struct MleResult {
  double tau = 0.0;
  double nu = 0.0;
  cd gain{0.0, 0.0};
};

// exhaustive single-target grid search with the gain eliminated by least squares:
// a whole-domain sweep at half-bin spacing, then a +-0.5 bin sweep at 1/32 and a
// final +-1/32 sweep at dd_grid_step
MleResult mle_grid_oracle(const SampleGrid& Y, FrameKind kind, const FrameConfig& config, double dd_grid_step,
                          const TxFrame* frame = nullptr);

}  // namespace uwisac
