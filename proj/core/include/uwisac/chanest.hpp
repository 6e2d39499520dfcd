#pragma once

#include "uwisac/channel.hpp"
#include "uwisac/frames.hpp"
#include "uwisac/types.hpp"

namespace uwisac {

enum class Stream { target, los };

struct ChannelEstimate {
  // rows: Doppler bin (unshifted, row r holds nu = r mod rows), cols: delay bin
  CMat data;
  FrameKind kind = FrameKind::uw2;

  // rows reordered to signed Doppler order [-rows/2, rows/2)
  CMat shifted() const;
  // signed Doppler of row r
  int signed_row(int r) const;
};

// frequency-domain reference, one column per grid column
CMat reference_matrix(const TxFrame& frame, FrameKind kind, const FrameConfig& config,
                      Stream stream = Stream::target);

ChannelEstimate estimate_channel(const SampleGrid& grid, const CMat& reference);

ChannelEstimate estimate_channel(const SampleGrid& grid, const TxFrame& frame, const FrameConfig& config,
                                 Stream stream = Stream::target);

// F_M^H u with u[m] = exp(-j 2 pi nu m / M)
CVec doppler_vector(int M, double nu);

}  // namespace uwisac
