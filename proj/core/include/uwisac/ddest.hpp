#pragma once

#include <utility>
#include <vector>

#include "uwisac/chanest.hpp"
#include "uwisac/types.hpp"

namespace uwisac {

struct EstimatorConfig {
  int n_grid = 256;
  int n_iterations = 8;
  int n_targets = 1;

  void validate() const;
  int refine_steps() const;
};

struct DDEstimate {
  double tau_hat = 0.0;
  double nu_hat = 0.0;  // signed bins
  cd gain_hat{0.0, 0.0};
  double tau_offset = 0.0;
  double nu_offset = 0.0;
};

struct MultiTargetResult {
  std::vector<DDEstimate> targets;
  DDEstimate los;
  bool los_removed = false;
  // |K||M| contractions spent in the per-target fine grid searches
  long long contractions = 0;
};

struct GridPeak {
  int m = 0;
  int k = 0;
};

// round half away from zero
long long round_half_away(double x);
int wrap_index(long long i, int n);
// value folded into [-n/2, n/2)
double wrap_signed(double x, int n);

CMat signature(FrameKind kind, const FrameConfig& config, double nu, double tau);

// argmax |H|^2 over all Doppler rows and the first search_cols delay columns
GridPeak integer_grid_estimate(const ChannelEstimate& H, int search_cols);
GridPeak integer_grid_estimate(const ChannelEstimate& H, const FrameConfig& config);

// |<H_S, Psi_S>|^2 / ||Psi_S||^2 on the searched columns S
double fine_objective(const ChannelEstimate& H, const FrameConfig& config, double nu, double tau);

struct RefineResult {
  double nu_hat = 0.0;  // signed
  double tau_hat = 0.0;
  double objective = 0.0;
  double objective_init = 0.0;
  int contractions = 0;
};

RefineResult fine_grid_refine(const ChannelEstimate& H, const FrameConfig& config, GridPeak init,
                              const EstimatorConfig& est);

cd estimate_gain(const ChannelEstimate& H, const CMat& psi, int m, int k);
// gain at the rounded (nu, tau) of the given estimate
cd estimate_gain_at(const ChannelEstimate& H, const FrameConfig& config, double nu, double tau);

MultiTargetResult multi_target_estimate(const ChannelEstimate& H, const ChannelEstimate* H_los,
                                        const FrameConfig& config, const EstimatorConfig& est);

}  // namespace uwisac
