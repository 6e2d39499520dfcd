#pragma once

#include <vector>

#include "uwisac/rng.hpp"
#include "uwisac/types.hpp"

namespace uwisac {

struct TxFrame {
  FrameKind kind = FrameKind::uw2;
  CVec target_stream;
  CVec los_stream;
  // frequency-domain payload of every sub-block, per stream (pilot sub-blocks hold the pilots)
  std::vector<CVec> target_payload;
  std::vector<CVec> los_payload;
  // +-1 pilot vectors for the PS sub-blocks 0, M/M_p, ...
  std::vector<RVec> pilots;
};

bool is_supported_qam(int order);

// uniform square-QAM points with unit average constellation energy
CVec gen_qam_symbols(int count, int order, Rng& rng);

// exp(-j*pi*n^2/length), n = 0..length-1
CVec zc_sequence(int length);

// one sub-block of length K+N_cp built from a length-K frequency-domain payload
CVec build_subblock(const FrameConfig& config, const CVec& payload, FrameKind kind);

TxFrame build_frame(const FrameConfig& config, Rng& rng);

// deterministic frame with a flat-spectrum unit-modulus payload in every sub-block
// (ZC of length K for OFDM/PS) and zero data for the UW kinds
TxFrame reference_frame(const FrameConfig& config);

std::vector<int> pilot_indexes(const FrameConfig& config);

// mean of 1/|d|^2 over the unit-energy constellation
double l_ofdm(int order);

double data_rate_loss(FrameKind kind, int M, int M_p);

}  // namespace uwisac
