#pragma once

#include <complex>

#include "uwisac/types.hpp"

namespace uwisac::fft {

// Unitary DFT helpers backed by FFTW. Plans are cached per (n, direction).
void forward(const cd* in, cd* out, int n);
void inverse(const cd* in, cd* out, int n);

CVec forward(const CVec& x);
CVec inverse(const CVec& x);

// column-wise transforms of a column-major matrix
CMat forward_cols(const CMat& x);
CMat inverse_cols(const CMat& x);

}  // namespace uwisac::fft
