#pragma once

#include "uwisac/types.hpp"

namespace uwisac {

double sinc(double x);
double sinc_deriv(double x);

// peak-normalized raised cosine, rc(0) = 1
double rc(double t, double alpha);
double rc_deriv(double t, double alpha);

// g[k] = rc(k - tau), k = 0..length-1, zero beyond half_span samples from tau
RVec sampled_taps(double tau_frac, int length, double alpha, int half_span = 32);

// length-periodic taps sum_l rc(k + l*length - tau) inside the truncation span;
// the circular-convolution kernel seen by a block of the given length
RVec periodic_taps(double tau, int length, double alpha, int half_span = 32);
// derivative of periodic_taps with respect to tau
RVec periodic_taps_deriv(double tau, int length, double alpha, int half_span = 32);

}  // namespace uwisac
