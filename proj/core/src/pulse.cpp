#include "uwisac/pulse.hpp"

#include <cmath>

namespace uwisac {

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double y = kPi * x;
    return 1.0 - y * y / 6.0 + y * y * y * y / 120.0;
  }
  return std::sin(kPi * x) / (kPi * x);
}

double sinc_deriv(double x) {
  if (std::abs(x) < 1e-3) {
    const double p2 = kPi * kPi;
    return -(p2 / 3.0) * x + (p2 * p2 / 30.0) * x * x * x;
  }
  return (std::cos(kPi * x) - sinc(x)) / x;
}

namespace {

// cos(pi a t) / (1 - (2 a t)^2) for t >= 0, written around t0 = 1/(2a) so the
// removable singularity cancels analytically
double shaping(double t, double a) {
  const double t0 = 0.5 / a;
  return 0.5 * kPi * sinc(a * (t0 - t)) / (1.0 + 2.0 * a * t);
}

double shaping_deriv(double t, double a) {
  const double t0 = 0.5 / a;
  const double den = 1.0 + 2.0 * a * t;
  return 0.5 * kPi * (-a * sinc_deriv(a * (t0 - t)) / den - 2.0 * a * sinc(a * (t0 - t)) / (den * den));
}

double rc_deriv_stable(double t, double a) {
  const double u = std::abs(t);
  const double d = sinc_deriv(u) * shaping(u, a) + sinc(u) * shaping_deriv(u, a);
  return t < 0 ? -d : d;
}

}  // namespace

double rc(double t, double alpha) {
  const double u = std::abs(t);
  return sinc(u) * shaping(u, alpha);
}

double rc_deriv(double t, double alpha) {
  const double u = std::abs(t);
  const double t0 = 0.5 / alpha;
  if (t == 0.0) return 0.0;
  if (u == t0) {
    const double x = kPi / (2.0 * alpha);
    const double v = 0.5 * alpha * (kPi * std::cos(x) - 3.0 * alpha * std::sin(x));
    return t < 0 ? -v : v;
  }
  if (u < 1e-3 || std::abs(u - t0) < 1e-3) return rc_deriv_stable(t, alpha);
  const double ca = std::cos(alpha * kPi * t);
  const double sa = std::sin(alpha * kPi * t);
  const double s = sinc(t);
  const double D = 1.0 - 4.0 * alpha * alpha * t * t;
  return (1.0 / t) * ca * (std::cos(kPi * t) - s) / D + 8.0 * alpha * alpha * t * ca * s / (D * D) -
         alpha * kPi * sa * s / D;
}

RVec sampled_taps(double tau_frac, int length, double alpha, int half_span) {
  RVec g = RVec::Zero(length);
  for (int k = 0; k < length; ++k) {
    const double t = k - tau_frac;
    if (std::abs(t) <= half_span) g[k] = rc(t, alpha);
  }
  return g;
}

namespace {

template <class F>
RVec periodic(double tau, int length, int half_span, F f) {
  RVec g = RVec::Zero(length);
  const int lo = static_cast<int>(std::floor(tau - half_span));
  const int hi = static_cast<int>(std::ceil(tau + half_span));
  for (int n = lo; n <= hi; ++n) {
    const double t = n - tau;
    if (std::abs(t) > half_span) continue;
    int k = n % length;
    if (k < 0) k += length;
    g[k] += f(t);
  }
  return g;
}

}  // namespace

RVec periodic_taps(double tau, int length, double alpha, int half_span) {
  return periodic(tau, length, half_span, [alpha](double t) { return rc(t, alpha); });
}

RVec periodic_taps_deriv(double tau, int length, double alpha, int half_span) {
  return periodic(tau, length, half_span, [alpha](double t) { return -rc_deriv(t, alpha); });
}

}  // namespace uwisac
