#include "uwisac/budget_geometry.hpp"

#include <cmath>

namespace uwisac {

void SystemBudget::validate() const {
  if (!(bandwidth > 0 && carrier > 0 && tx_power > 0 && gain_bs > 0 && gain_r > 0 && rcs > 0 &&
        path_loss_exp > 0 && d_br > 0 && noise_psd > 0))
    throw ConfigError("system budget entries must be positive");
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

SystemBudget outdoor_budget() {
  SystemBudget b;
  b.bandwidth = 1024 * 120e3;
  b.carrier = 28e9;
  b.tx_power = dbm_to_watt(23.98);
  b.gain_bs = 8.0;
  b.gain_r = 64.0;
  b.rcs = 10.0;
  b.path_loss_exp = 2.3;
  b.d_br = 200.0;
  b.noise_psd = dbm_to_watt(-174.0);
  return b;
}

SystemBudget indoor_budget() {
  SystemBudget b = outdoor_budget();
  b.bandwidth = 1024 * 480e3;
  b.rcs = 1.0;
  b.d_br = 20.0;
  return b;
}

long long processing_gain(FrameKind kind, const FrameConfig& c) {
  const long long M = c.M, K = c.K, Mp = c.M_p, N = c.n_cp;
  switch (kind) {
    case FrameKind::ofdm: return M * K;
    case FrameKind::ps: return Mp * K;
    case FrameKind::uw1: return M * N;
    case FrameKind::uw2: return M * N / 2;
  }
  return 0;
}

Resolution resolution(const FrameConfig& c, double bandwidth, int n_grid) {
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  if (n_grid < 1) throw ConfigError("n_grid must be positive");
  return {1.0 / bandwidth / n_grid, bandwidth / c.n_x() / n_grid};
}

MaxDD max_unambiguous(FrameKind kind, const FrameConfig& c, double bandwidth) {
  const Resolution r = resolution(c, bandwidth);
  const int nd = kind == FrameKind::uw2 ? c.n_cp / 2 - 1 : c.n_cp - 1;
  const int nm = kind == FrameKind::ps ? c.M_p / 2 - 1 : c.M / 2 - 1;
  return {nd * r.delta_tau, nm * r.delta_nu};
}

double receiver_complexity(FrameKind kind, const FrameConfig& c, long long n_fg) {
  double rows = c.M;
  double L = c.K;
  switch (kind) {
    case FrameKind::ofdm: break;
    case FrameKind::ps: rows = c.M_p; break;
    case FrameKind::uw1: L = c.n_cp; break;
    case FrameKind::uw2: L = c.n_cp / 2.0; break;
  }
  return rows * L * (std::log2(rows * L * L) + 1.0 + static_cast<double>(n_fg));
}

long long fine_grid_count(int n_iterations, int n_targets, int n_grid) {
  int steps = 0;
  for (int g = n_grid; g > 1; g >>= 1) ++steps;
  return 2LL * n_iterations * n_targets * steps;
}

double radar_snr(double G, double gain_sq, double noise_power) {
  if (!(noise_power > 0.0)) throw ConfigError("noise power must be positive");
  return G * gain_sq / noise_power;
}

double snr_loss_uw1(double rho, double G, double los_term) { return 2.0 + rho / G + los_term; }

double sinr_uw1(double rho, double G, double los_term) { return rho / snr_loss_uw1(rho, G, los_term); }

double target_gain(double d_bt, double d_tr, const SystemBudget& b) {
  if (!(d_bt > 0.0 && d_tr > 0.0)) throw ConfigError("distances must be positive");
  const double lam = b.wavelength();
  return b.tx_power * b.gain_bs * b.gain_r * lam * lam * b.rcs /
         (std::pow(4.0 * kPi, 3) * std::pow(d_bt * d_tr, b.path_loss_exp));
}

Contour iso_range_contour(double tau_max, double d_br, int n_points) {
  if (tau_max < 0.0) throw ConfigError("tau_max must be non-negative");
  if (n_points < 3) throw ConfigError("need at least 3 contour points");
  const double tc = tau_max * kSpeedOfLight;
  const double d_max = tc + d_br;
  const double ax = d_max / 2.0;
  const double by = 0.5 * std::sqrt(tc * tc + 2.0 * d_br * tc);
  Contour c;
  c.loops.emplace_back();
  for (int i = 0; i < n_points; ++i) {
    const double t = 2.0 * kPi * i / n_points;
    c.loops[0].push_back({ax * std::cos(t), by * std::sin(t)});
  }
  return c;
}

double cassini_b2(double target_snr, double G, const SystemBudget& b, double noise_power) {
  if (!(target_snr > 0.0)) throw ConfigError("target SNR must be positive");
  const double lam = b.wavelength();
  const double num = b.tx_power * G * b.gain_bs * b.gain_r * lam * lam * b.rcs;
  const double den = target_snr * noise_power * std::pow(4.0 * kPi, 3);
  return std::pow(num / den, 1.0 / b.path_loss_exp);
}

namespace {

// points at radar distance t: d_bt = b2 / t, radar at (c, 0), BS at (-c, 0)
std::vector<Point2> cassini_loop(double b2, double c, double t0, double t1, int n) {
  std::vector<Point2> upper, lower;
  for (int i = 0; i <= n; ++i) {
    // cosine spacing clusters samples near the axis crossings
    const double t = t0 + (t1 - t0) * 0.5 * (1.0 - std::cos(kPi * i / n));
    const double x = (b2 * b2 / (t * t) - t * t) / (4.0 * c);
    const double y2 = t * t - (x - c) * (x - c);
    // both ends are axis crossings
    const double y = (i == 0 || i == n || y2 <= 0.0) ? 0.0 : std::sqrt(y2);
    upper.push_back({x, y});
    lower.push_back({x, -y});
  }
  std::vector<Point2> loop(upper.begin(), upper.end());
  for (int i = n - 1; i >= 1; --i) loop.push_back(lower[static_cast<size_t>(i)]);
  return loop;
}

}  // namespace

CassiniOval cassini_oval(double target_snr, double G, const SystemBudget& b, double noise_power, int n_points) {
  if (n_points < 4) throw ConfigError("need at least 4 contour points");
  CassiniOval ov;
  ov.b2 = cassini_b2(target_snr, G, b, noise_power);
  const double c = b.d_br / 2.0;
  const double bb = std::sqrt(ov.b2);
  const double tlo = std::sqrt(c * c + ov.b2) - c;
  const double thi = std::sqrt(c * c + ov.b2) + c;
  const int n = n_points / 2;
  if (bb >= c) {
    ov.contour.loops.push_back(cassini_loop(ov.b2, c, tlo, thi, n));
  } else {
    const double r = std::sqrt(c * c - ov.b2);
    ov.contour.loops.push_back(cassini_loop(ov.b2, c, tlo, c - r, n));
    ov.contour.loops.push_back(cassini_loop(ov.b2, c, c + r, thi, n));
  }
  return ov;
}

std::optional<double> range_at_angle(const Contour& contour, double d_br, double theta_deg) {
  const double th = theta_deg * kPi / 180.0;
  const double ox = d_br / 2.0;
  const double dx = std::cos(th), dy = std::sin(th);
  std::optional<double> best;
  for (const auto& loop : contour.loops) {
    const size_t n = loop.size();
    for (size_t i = 0; i < n; ++i) {
      const Point2 a = loop[i];
      const Point2 b = loop[(i + 1) % n];
      // ray o + s d meets segment a + u (b - a)
      const double ex = b.x - a.x, ey = b.y - a.y;
      const double den = dx * (-ey) - dy * (-ex);
      if (std::abs(den) < 1e-300) continue;
      const double rx = a.x - ox, ry = a.y;
      const double s = (rx * (-ey) - ry * (-ex)) / den;
      const double u = (dx * ry - dy * rx) / den;
      if (s > 0.0 && u >= 0.0 && u <= 1.0) {
        if (!best || s > *best) best = s;
      }
    }
  }
  return best;
}

}  // namespace uwisac
