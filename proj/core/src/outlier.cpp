#include "uwisac/outlier.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "uwisac/ddest.hpp"
#include "uwisac/frames.hpp"

namespace uwisac {
namespace {

double log_bessel_i0(double x) {
  if (x < 50.0) return std::log(std::cyl_bessel_i(0.0, x));
  const double y = 1.0 / (8.0 * x);
  return x - 0.5 * std::log(2.0 * kPi * x) + std::log1p(y + 4.5 * y * y + 37.5 * y * y * y);
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// sum_i C(i+n, n) q^i / i!, in logs
double log_t_n(int n, double q, int cap, double& partial, bool& ok) {
  if (q <= 0.0) return 0.0;
  const double lq = std::log(q);
  double acc = kNegInf;
  for (int i = 0; i < cap; ++i) {
    const double lt = std::lgamma(i + n + 1.0) - std::lgamma(n + 1.0) - 2.0 * std::lgamma(i + 1.0) + i * lq;
    acc = log_add(acc, lt);
    const double ratio = (i + n + 1.0) / (i + 1.0) * q / (i + 1.0);
    if (ratio < 1.0) {
      const double tail = lt + std::log(ratio / (1.0 - ratio));
      if (tail - acc < std::log(1e-17)) return acc;
    }
  }
  partial = acc;
  ok = false;
  return acc;
}

}  // namespace

double rice_pdf(double r, double v, double sigma) {
  if (r < 0.0) throw DomainError("rice_pdf needs r >= 0");
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (r == 0.0) return 0.0;
  const double s2 = sigma * sigma;
  const double lp = std::log(r / s2) - (r * r + v * v) / (2.0 * s2) + log_bessel_i0(r * v / s2);
  return std::exp(lp);
}

double pr_rice_greater_exact(const RicePair& pair, SeriesOptions opts) {
  if (pair.v_x < 0.0 || pair.v_y < 0.0 || !(pair.sigma > 0.0)) throw DomainError("invalid Rician pair");
  const double s2 = pair.sigma * pair.sigma;
  const double a = pair.v_x * pair.v_x / (2.0 * s2);
  const double b = pair.v_y * pair.v_y / (2.0 * s2);
  const double A = a / 2.0;
  const double Bq = b / 2.0;
  const int cap = opts.cap;

  std::vector<double> lT;
  bool ok = true;
  double partial_t = 0.0;
  auto logT = [&](int n) {
    while (static_cast<int>(lT.size()) <= n) lT.push_back(log_t_n(static_cast<int>(lT.size()), Bq, cap, partial_t, ok));
    return lT[static_cast<size_t>(n)];
  };

  // log S_k = log sum_n A^n / (k+1)_n T_n ; decreasing in k
  auto logS = [&](int k) {
    if (A <= 0.0) return logT(0);
    const double lA = std::log(A);
    double acc = kNegInf;
    for (int n = 0; n < cap; ++n) {
      const double lt = n * lA - (std::lgamma(k + 1.0 + n) - std::lgamma(k + 1.0)) + logT(n);
      acc = log_add(acc, lt);
      const double ratio = std::exp(lA - std::log(k + 1.0 + n) + logT(n + 1) - logT(n));
      if (ratio < 1.0 && lt + std::log(ratio / (1.0 - ratio)) - acc < std::log(1e-16)) return acc;
    }
    ok = false;
    return acc;
  };

  auto log_pois = [&](int k) {
    if (a <= 0.0) return k == 0 ? 0.0 : kNegInf;
    return k * std::log(a) - a - std::lgamma(k + 1.0);
  };
  // Poisson tails P(K > k) and P(K < k)
  auto upper = [&](int k) { return a <= 0.0 ? 0.0 : boost::math::gamma_p(k + 1.0, a); };
  auto lower = [&](int k) { return (k <= 0 || a <= 0.0) ? 0.0 : boost::math::gamma_q(static_cast<double>(k), a); };

  const int mode = static_cast<int>(std::floor(a));
  const double R0 = std::exp(logS(0) - b);
  double sum = 0.0;
  int terms = 0;
  int lo = mode, hi = mode;
  sum += std::exp(log_pois(mode) + logS(mode) - b);
  ++terms;
  bool up_done = false, down_done = (mode == 0);
  while (!(up_done && down_done)) {
    if (terms >= cap || !ok) throw NumericError("Rician ratio series did not converge", 0.5 * sum);
    if (!up_done) {
      const double Rk = std::exp(logS(hi) - b);
      if (0.5 * Rk * upper(hi) < opts.tol / 4.0) {
        up_done = true;
      } else {
        ++hi;
        sum += std::exp(log_pois(hi) + logS(hi) - b);
        ++terms;
      }
    }
    if (!down_done) {
      if (lo == 0 || 0.5 * R0 * lower(lo) < opts.tol / 4.0) {
        down_done = true;
      } else {
        --lo;
        sum += std::exp(log_pois(lo) + logS(lo) - b);
        ++terms;
      }
    }
  }
  if (!ok) throw NumericError("Rician ratio series did not converge", 0.5 * sum);
  return 0.5 * sum;
}

double empirical_f1(double v) {
  const double t = 1.909 * std::pow(v, 1.3838);
  return 2.0 + 0.6616 * (1.0 - std::exp(-t) * (1.0 + t));
}

double empirical_f2(double v) {
  if (v <= 0.0) return 0.0;
  const double p = std::pow(v, 0.89899);
  return 1.4899 * std::exp(-1.0 / (0.39899 * p)) * p;
}

double pr_rice_greater_empirical(double vx_norm, double vy_norm) {
  if (vx_norm < 0.0 || vy_norm < 0.0) throw DomainError("normalized amplitudes must be non-negative");
  // the fit is parameterized by the weaker amplitude; the stronger side follows by complement
  const bool x_weaker = vx_norm < vy_norm;
  const double lo = x_weaker ? vx_norm : vy_norm;
  const double hi = x_weaker ? vy_norm : vx_norm;
  const double f1 = empirical_f1(lo);
  const double f2 = empirical_f2(lo);
  const double p = 0.5 * std::exp(((lo - f2) * (lo - f2) - (hi - f2) * (hi - f2)) / (2.0 * f1));
  return x_weaker ? p : 1.0 - p;
}

double ratio_mean(const RicePair& pair) {
  if (pair.v_y <= 0.0) throw DomainError("v_y must be positive");
  return pair.v_x / pair.v_y;
}

double ratio_std(const RicePair& pair) {
  if (pair.v_y <= 0.0) throw DomainError("v_y must be positive");
  const double s2 = pair.sigma * pair.sigma;
  const double vy2 = pair.v_y * pair.v_y;
  // (v_x^2/v_y^2)(2s^2/v_x^2 + 2s^2/v_y^2) with the v_x^2 cancelled
  return std::sqrt(2.0 * s2 / vy2 + 2.0 * s2 * pair.v_x * pair.v_x / (vy2 * vy2));
}

double pr_rice_greater_gaussian(const RicePair& pair) {
  const double mu = ratio_mean(pair);
  const double sd = ratio_std(pair);
  return 0.5 * std::erfc((1.0 - mu) / sd / std::sqrt(2.0));
}

double pr_rice_greater(const RicePair& pair) {
  if (!(pair.sigma > 0.0)) throw DomainError("sigma must be positive");
  const double vx = pair.v_x / pair.sigma;
  if (vx < 30.0) return pr_rice_greater_empirical(vx, pair.v_y / pair.sigma);
  return pr_rice_greater_gaussian(pair);
}

double rice_sigma2(FrameKind kind, const FrameConfig& config, const Target& target, double noise_power) {
  double L = 1.0;
  if (kind == FrameKind::ofdm) L = l_ofdm(config.qam_order);
  if (kind == FrameKind::uw1) L = 2.0 + target.gain_mag * target.gain_mag / noise_power;
  return 0.5 * noise_power * L;
}

OutlierBound outlier_ub(FrameKind kind, const FrameConfig& config, const Target& target, double noise_power) {
  const FrameConfig c = config.with_kind(kind);
  const CMat psi = signature(kind, c, target.nu, target.tau);
  const double heff = target.gain_mag * std::sqrt(static_cast<double>(c.fast_len()));
  const double sigma = std::sqrt(rice_sigma2(kind, c, target, noise_power));
  const int R = c.slow_len();
  OutlierBound ub;
  ub.m0 = wrap_index(round_half_away(target.nu), R);
  ub.k0 = static_cast<int>(round_half_away(target.tau));
  const double vy = heff * std::abs(psi(ub.m0, ub.k0));
  for (int k = 0; k < c.search_len(); ++k) {
    if (k == ub.k0) continue;
    ub.delay += pr_rice_greater({heff * std::abs(psi(ub.m0, k)), vy, sigma});
  }
  for (int m = 0; m < R; ++m) {
    if (m == ub.m0) continue;
    ub.doppler += pr_rice_greater({heff * std::abs(psi(m, ub.k0)), vy, sigma});
  }
  ub.delay = std::min(1.0, ub.delay);
  ub.doppler = std::min(1.0, ub.doppler);
  return ub;
}

}  // namespace uwisac
