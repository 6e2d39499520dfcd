// Acceptance checks 1-11. Prints one detail line per sub-check and one PASS/FAIL line per criterion.
// Exit status is non-zero only for failures outside the documented known-deviation list.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "uwisac/budget_geometry.hpp"
#include "uwisac/chanest.hpp"
#include "uwisac/channel.hpp"
#include "uwisac/crb.hpp"
#include "uwisac/ddest.hpp"
#include "uwisac/fft.hpp"
#include "uwisac/harness.hpp"
#include "uwisac/outlier.hpp"
#include "uwisac/pulse.hpp"

using namespace uwisac;

namespace {

// measured deviations with a recorded analysis (see README)
const std::set<std::string> kKnown{
    "1.qam64", "1.qam256", "5.power.beta_0.707_frac", "8.empirical", "8.gaussian",
    "9.waterfall.ofdm", "9.waterfall.ps", "9.waterfall.uw1", "9.waterfall.uw2",
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Sub {
  std::string id;
  bool pass;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  std::vector<Sub> subs;
  std::vector<std::string> info;

  void check(const std::string& id, bool pass, const std::string& detail) {
    subs.push_back({std::to_string(number) + "." + id, pass, detail});
  }
  void note(const std::string& s) { info.push_back(s); }
};

int g_unexpected = 0;
int g_known = 0;

void report(const Criterion& c, double seconds) {
  int fails = 0, known = 0;
  for (const auto& s : c.subs) {
    const bool k = kKnown.count(s.id) > 0;
    std::printf("    %-6s %-28s %s%s\n", s.pass ? "ok" : "FAIL", s.id.c_str(), s.detail.c_str(),
                !s.pass && k ? "  [known deviation]" : "");
    if (!s.pass) {
      ++fails;
      known += k;
    }
  }
  for (const auto& i : c.info) std::printf("    info   %s\n", i.c_str());
  g_unexpected += fails - known;
  g_known += known;
  std::string tail = fmt("(%zu sub-checks, %.1f s)", c.subs.size(), seconds);
  if (fails) tail = fmt("(%d of %zu sub-checks failed%s, %.1f s)", fails, c.subs.size(),
                        known == fails ? ", all known deviations" : "", seconds);
  std::printf("%s %2d %s %s\n", fails ? "FAIL" : "PASS", c.number, c.title.c_str(), tail.c_str());
  std::fflush(stdout);
}

double value(const std::vector<ResultRow>& rows, FrameKind k, double snr, const std::string& m) {
  const auto v = row_value(rows, k, snr, m);
  if (!v) throw std::runtime_error("missing row " + std::string(to_string(k)) + " " + m);
  return *v;
}

std::string opt(std::optional<double> v) { return v ? fmt("%.2f dB", *v) : std::string("none"); }

std::vector<double> range(double a, double b, double step) {
  std::vector<double> v;
  for (double x = a; x <= b + 1e-9; x += step) v.push_back(x);
  return v;
}

struct Ctx {
  int threads = 0;
  std::uint64_t seed = 1;
};

ExperimentConfig base(const Ctx& ctx) {
  ExperimentConfig c;
  c.threads = ctx.threads;
  c.seed = ctx.seed;
  return c;
}

// ---------------------------------------------------------------- 1
void c1(Criterion& c, const Ctx&) {
  const int orders[] = {4, 16, 64, 256, 1024};
  const double ref[] = {1.0, 1.89, 2.68, 3.43, 4.17};
  for (int i = 0; i < 5; ++i) {
    const double v = l_ofdm(orders[i]);
    c.check(fmt("qam%d", orders[i]), std::abs(v - ref[i]) <= 0.005,
            fmt("l_ofdm=%.6f ref=%.2f |diff|=%.4f (<= 0.005)", v, ref[i], std::abs(v - ref[i])));
  }
  c.note(fmt("10*log10(l_ofdm(256)) = %.4f dB", lin_to_db(l_ofdm(256))));
}

// ---------------------------------------------------------------- 2
void c2(Criterion& c, const Ctx&) {
  const FrameConfig link = link_config();
  const long long want_link[] = {8192, 1024, 2048, 1024};
  for (FrameKind k : kAllKinds) {
    const long long g = processing_gain(k, link);
    c.check(fmt("G.link.%s", std::string(to_string(k)).c_str()), g == want_link[static_cast<int>(k)],
            fmt("G=%lld want %lld", g, want_link[static_cast<int>(k)]));
  }
  const FrameConfig sys = system_config();
  const long long want_sys[] = {140LL * 1024, 20LL * 1024, 140LL * 204, 140LL * 102};
  for (FrameKind k : kAllKinds) {
    const long long g = processing_gain(k, sys);
    c.check(fmt("G.system.%s", std::string(to_string(k)).c_str()), g == want_sys[static_cast<int>(k)],
            fmt("G=%lld want %lld", g, want_sys[static_cast<int>(k)]));
  }
  // UW frames carry data in every sub-block: rate ratio M / (M - M_p)
  const double adv = 100.0 * (1.0 / (1.0 - data_rate_loss(FrameKind::ps, 140, 20)) - 1.0);
  c.check("rate_advantage", std::lround(adv * 100) == 1667, fmt("%.4f%% -> %.2f%% want 16.67%%", adv, adv));
}

// ---------------------------------------------------------------- 3 and 4
struct SingleTargetSweep {
  std::vector<ResultRow> rows;
  std::vector<ResultRow> low;
};

SingleTargetSweep single_target_sweep(const Ctx& ctx) {
  SingleTargetSweep f;
  ExperimentConfig c = base(ctx);
  c.snr_db = {30.0, 35.0, 40.0};
  c.trials = 1000;
  c.include_crb = true;
  f.rows = run_rmse_sweep(c);
  ExperimentConfig l = base(ctx);
  l.kinds = {FrameKind::uw1, FrameKind::uw2};
  l.snr_db = {20.0, 22.0, 24.0};
  l.trials = 1000;
  l.include_crb = true;
  f.low = run_rmse_sweep(l);
  return f;
}

double mse_ratio_db(const std::vector<ResultRow>& rows, FrameKind a, FrameKind b, const std::vector<double>& snrs,
                    const std::string& m) {
  double acc = 0.0;
  for (double s : snrs) acc += 20.0 * std::log10(value(rows, a, s, m) / value(rows, b, s, m));
  return acc / static_cast<double>(snrs.size());
}

void c3(Criterion& c, const SingleTargetSweep& f) {
  for (FrameKind k : {FrameKind::uw2, FrameKind::ps})
    for (const char* d : {"delay", "doppler"})
      for (double s : {30.0, 35.0, 40.0}) {
        const double r = value(f.rows, k, s, std::string("rmse_") + d);
        const double b = value(f.rows, k, s, std::string("crb_") + d);
        const double q = r / b;
        c.check(fmt("%s.%s@%.0f", std::string(to_string(k)).c_str(), d, s), q <= 1.3 && q >= 1.0 / 1.3,
                fmt("rmse=%.5f sqrt_crb=%.5f ratio=%.3f (within x1.3)", r, b, q));
      }
  const double shift = lin_to_db(l_ofdm(256));
  for (const char* d : {"delay", "doppler"}) {
    const double off = mse_ratio_db(f.rows, FrameKind::ofdm, FrameKind::uw2, {30.0, 35.0, 40.0}, std::string("rmse_") + d);
    c.check(fmt("ofdm_shift.%s", d), std::abs(off - shift) <= 0.5,
            fmt("mean 20log10(rmse_ofdm/rmse_uw2) over 30/35/40 dB = %.2f dB (5.36 +- 0.5)", off));
  }
  for (const char* d : {"delay", "doppler"}) {
    const double off = mse_ratio_db(f.low, FrameKind::uw1, FrameKind::uw2, {20.0, 22.0, 24.0}, std::string("rmse_") + d);
    c.check(fmt("uw1_low_offset.%s", d), std::abs(off - 3.0) <= 0.5,
            fmt("mean 20log10(rmse_uw1/rmse_uw2) over 20/22/24 dB = %.2f dB (3.0 +- 0.5)", off));
    const double crb_off =
        mse_ratio_db(f.low, FrameKind::uw1, FrameKind::uw2, {20.0, 22.0, 24.0}, std::string("crb_") + d);
    c.note(fmt("uw1/uw2 sqrt-CRB offset over 20/22/24 dB (%s) = %.2f dB", d, crb_off));
  }
  // the bound itself carries the SINR cap of G_uw1 = 2048
  for (const char* d : {"delay", "doppler"}) {
    const double r = value(f.rows, FrameKind::uw1, 40.0, std::string("rmse_") + d);
    const double b = value(f.rows, FrameKind::uw1, 40.0, std::string("crb_") + d);
    c.check(fmt("uw1_floor.%s@40", d), r / b <= 1.3 && r / b >= 1.0 / 1.3,
            fmt("rmse=%.5f sqrt_crb(SINR-capped)=%.5f ratio=%.3f", r, b, r / b));
  }
  const FrameConfig u1 = link_config(FrameKind::uw1);
  const double g1 = static_cast<double>(processing_gain(FrameKind::uw1, u1));
  const double cap_rmse = std::sqrt(crb({Target{4.249, 2.237, std::sqrt(1e9 / g1), 0.3}}, FrameKind::uw1, u1, 1.0).delay[0]);
  const double r40 = value(f.rows, FrameKind::uw1, 40.0, "rmse_delay");
  const double r35 = value(f.rows, FrameKind::uw1, 35.0, "rmse_delay");
  const double u40 = value(f.rows, FrameKind::uw2, 40.0, "rmse_delay");
  const double u35 = value(f.rows, FrameKind::uw2, 35.0, "rmse_delay");
  c.check("uw1_floor.flattening", r40 / r35 > u40 / u35,
          fmt("uw1 rmse 40/35 dB = %.3f vs uw2 %.3f; sqrt-CRB at 90 dB = %.5f (cap sinr %.0f)", r40 / r35, u40 / u35,
              cap_rmse, sinr_uw1(1e9, g1, 0.0)));
}

void c4(Criterion& c, const SingleTargetSweep& f) {
  for (FrameKind k : kAllKinds) {
    const double d = value(f.rows, k, 40.0, "rmse_delay_integer");
    const double n = value(f.rows, k, 40.0, "rmse_doppler_integer");
    const std::string ks(to_string(k));
    c.check(ks + ".delay@40", std::abs(d - 0.249) <= 0.005, fmt("integer rmse=%.4f (0.249 +- 0.005)", d));
    c.check(ks + ".doppler@40", std::abs(n - 0.237) <= 0.005, fmt("integer rmse=%.4f (0.237 +- 0.005)", n));
  }
}

// ---------------------------------------------------------------- 5
TxFrame guards_only(const FrameConfig& c) {
  TxFrame f;
  f.kind = c.kind;
  f.target_stream = CVec::Zero(c.n_x());
  for (int m = 0; m < c.M; ++m)
    f.target_stream.segment(m * c.block_len(), c.block_len()) = build_subblock(c, CVec::Zero(c.K), c.kind);
  f.los_stream = f.target_stream;
  return f;
}

void c5(Criterion& c, const Ctx& ctx) {
  const FrameConfig fc = link_config(FrameKind::uw1);
  const double G = static_cast<double>(processing_gain(FrameKind::uw1, fc));
  struct Case {
    const char* name;
    double beta;
    bool los;
    double los_tau;
  };
  const double b7 = 1.0 / std::sqrt(2.0);
  const Case cases[] = {{"no_los", 0.0, false, 0.0},
                        {"beta_0.707", b7, true, 0.0},
                        {"beta_0.1", 0.1, true, 0.25},
                        {"beta_0.707_frac", b7, true, 0.25}};
  // sampled energy of the combined RC pulse at a fractional delay
  const auto pulse_energy = [&](double tau) {
    double e = 0.0;
    for (int n = -fc.rc.half_span - 2; n <= fc.rc.half_span + 2; ++n) e += std::pow(rc(n - tau, fc.rc.alpha), 2);
    return e;
  };
  for (const Case& cs : cases) {
    Scene s;
    s.targets = {Target{4.249, 2.237, std::sqrt(db_to_lin(30.0) / G), 0.3}};
    if (cs.los) s.los = Target{cs.los_tau, 0.05, std::sqrt(db_to_lin(50.0) / G), 1.0};
    s.beta = cs.beta;
    s.noise_power = 1.0;
    Scene quiet = s;
    quiet.noise_power = 0.0;
    Rng r0(0);
    const TxFrame g = guards_only(fc);
    const CMat det = sample_grid(simulate_rx(g, quiet, fc, r0, SimOptions{false}).target, FrameKind::uw1, fc).data;
    double acc = 0.0;
    long long blocks = 0;
    for (int t = 0; blocks < 10000; ++t) {
      Rng rng(derive_seed(ctx.seed ^ 0x5eedULL, static_cast<std::uint64_t>(t)));
      const TxFrame f = build_frame(fc, rng);
      const CMat y = sample_grid(simulate_rx(f, s, fc, rng, SimOptions{false}).target, FrameKind::uw1, fc).data;
      // sub-block 0 has no data predecessor
      for (int m = 1; m < fc.M; ++m) {
        acc += (y.col(m) - det.col(m)).squaredNorm() / fc.n_cp;
        ++blocks;
      }
    }
    const double meas = acc / static_cast<double>(blocks);
    const double want = l_uw1_expected(s) * s.noise_power;
    c.check(fmt("power.%s", cs.name), std::abs(meas / want - 1.0) <= 0.05,
            fmt("measured %.4f vs sigma^2 L_uw1 %.4f over %lld sub-blocks (ratio %.4f, 5%%)", meas, want, blocks,
                meas / want));
    double weighted = 2.0 + s.targets[0].gain_mag * s.targets[0].gain_mag * pulse_energy(0.249);
    if (cs.los) weighted += s.beta * s.beta * s.los.gain_mag * s.los.gain_mag * pulse_energy(cs.los_tau);
    c.check(fmt("energy_weighted.%s", cs.name), std::abs(meas / weighted - 1.0) <= 0.02,
            fmt("measured vs pulse-energy-weighted L_uw1 %.4f (ratio %.4f, 2%%)", weighted, meas / weighted));
  }
  for (auto [b, want] : {std::pair{1.0 / std::sqrt(2.0), 24.41}, {0.1, 0.49}}) {
    const double term = b * b * db_to_lin(50.0) / G;
    c.check(fmt("los_term.beta_%.3f", b), std::abs(term - want) <= 0.005,
            fmt("beta^2 |h_los|^2 / sigma^2 = %.4f want %.2f", term, want));
  }
}

// ---------------------------------------------------------------- 6
ExperimentConfig los_scene(const Ctx& ctx, FrameKind k, double beta, std::vector<double> snrs, int trials) {
  ExperimentConfig c = base(ctx);
  c.kinds = {k};
  c.targets = {TargetSpec{Window{3.5, 4.5}, Window{1.5, 2.5}, std::nullopt, 0.0}};
  c.los = LosSpec{};
  c.beta = beta;
  c.snr_db = std::move(snrs);
  c.trials = trials;
  return c;
}

void c6(Criterion& c, const Ctx& ctx) {
  const auto uw2_grid = range(10.0, 30.0, 2.0);
  std::vector<double> g2 = uw2_grid;
  g2.push_back(35.0);
  g2.push_back(40.0);
  const auto a = run_rmse_sweep(los_scene(ctx, FrameKind::uw2, 0.0, g2, 500));
  const auto b = run_rmse_sweep(los_scene(ctx, FrameKind::uw2, 0.1, g2, 500));
  for (const char* d : {"delay", "doppler"}) {
    const std::string m = std::string("rmse_") + d + "_offset";
    for (double lvl : {0.1, 0.02}) {
      const auto sa = crossing_snr(a, FrameKind::uw2, m, lvl);
      const auto sb = crossing_snr(b, FrameKind::uw2, m, lvl);
      const bool ok = sa && sb && std::abs(*sa - *sb) <= 1.0;
      c.check(fmt("uw2.%s.level_%g", d, lvl), ok,
              fmt("beta=0 reaches %g at %s, beta=0.1 at %s (|diff| <= 1 dB)", lvl, opt(sa).c_str(), opt(sb).c_str()));
    }
    double worst = 0.0;
    for (double s : {35.0, 40.0}) worst = std::max(worst, std::abs(20.0 * std::log10(value(b, FrameKind::uw2, s, m) / value(a, FrameKind::uw2, s, m))));
    c.check(fmt("uw2.%s.high_snr", d), worst <= 1.0, fmt("max |20log10 ratio| at 35/40 dB = %.2f dB (<= 1 dB)", worst));
  }
  const auto u0 = run_rmse_sweep(los_scene(ctx, FrameKind::uw1, 0.0, range(12.0, 30.0, 2.0), 500));
  const auto u7 = run_rmse_sweep(los_scene(ctx, FrameKind::uw1, 1.0 / std::sqrt(2.0), range(20.0, 44.0, 2.0), 500));
  for (const char* d : {"delay", "doppler"}) {
    const std::string m = std::string("rmse_") + d + "_offset";
    const auto s0 = crossing_snr(u0, FrameKind::uw1, m, 0.1);
    const auto s7 = crossing_snr(u7, FrameKind::uw1, m, 0.1);
    const bool ok = s0 && s7 && *s7 - *s0 > 8.0;
    c.check(fmt("uw1.%s.waterfall_shift", d), ok,
            fmt("rmse 0.1 reached at %s (beta=0) and %s (beta=1/sqrt2): shift %s (> 8 dB)", opt(s0).c_str(),
                opt(s7).c_str(), s0 && s7 ? fmt("%.2f dB", *s7 - *s0).c_str() : "n/a"));
  }
  c.note(fmt("uw2 beta=0.1 offset rmse at 40 dB: delay %.5f doppler %.5f", value(b, FrameKind::uw2, 40.0, "rmse_delay_offset"),
             value(b, FrameKind::uw2, 40.0, "rmse_doppler_offset")));
}

// ---------------------------------------------------------------- 7
void c7(Criterion& c, const Ctx& ctx) {
  const std::vector<FrameKind> kinds{FrameKind::uw1, FrameKind::uw2};
  ExperimentConfig single = los_scene(ctx, FrameKind::uw2, 0.1, {40.0}, 500);
  single.kinds = kinds;
  const auto s = run_rmse_sweep(single);
  std::map<double, std::vector<ResultRow>> two;
  for (double delta : {1.25, 0.5}) {
    ExperimentConfig c2 = single;
    c2.targets.push_back(TargetSpec{Window{delta, delta}, Window{delta, delta}, 0, 0.0});
    c2.estimator.n_iterations = 8;
    two[delta] = run_rmse_sweep(c2);
  }
  for (FrameKind k : kinds) {
    const std::string ks(to_string(k));
    for (const char* d : {"delay", "doppler"}) {
      const std::string m = std::string("rmse_") + d + "_offset";
      const double floor1 = value(s, k, 40.0, m);
      // per-target floors pooled in quadrature
      const auto pooled = [&](double delta) {
        const double a = value(two[delta], k, 40.0, m + "[0]");
        const double b = value(two[delta], k, 40.0, m + "[1]");
        return std::sqrt(0.5 * (a * a + b * b));
      };
      const double f125 = pooled(1.25), f05 = pooled(0.5);
      c.check(fmt("%s.%s.delta_1.25", ks.c_str(), d), f125 <= 1.5 * floor1,
              fmt("floor %.5f vs single-target %.5f (ratio %.2f, <= 1.5)", f125, floor1, f125 / floor1));
      c.check(fmt("%s.%s.delta_0.5", ks.c_str(), d), f05 >= 3.0 * f125,
              fmt("floor %.5f vs delta 1.25 floor %.5f (ratio %.1f, >= 3)", f05, f125, f05 / f125));
    }
  }
}

// ---------------------------------------------------------------- 8
struct Mc {
  double p;
  double se;
};

Mc monte_carlo(const RicePair& q, long long n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, q.sigma);
  long long hits = 0;
  for (long long i = 0; i < n; ++i) {
    const double x = std::hypot(q.v_x + nd(rng), nd(rng));
    const double y = std::hypot(q.v_y + nd(rng), nd(rng));
    hits += x > y;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(n)) / static_cast<double>(n))};
}

void c8(Criterion& c, const Ctx& ctx) {
  const long long n = 10'000'000;
  const RicePair pts[] = {{0, 2, 1}, {3, 5, 1}, {7, 4, 1.5}, {10, 12, 1}, {20, 21.5, 1}, {22, 20.5, 1}};
  int i = 0;
  for (const RicePair& q : pts) {
    const double e = pr_rice_greater_exact(q);
    const Mc mc = monte_carlo(q, n, derive_seed(ctx.seed, 800 + i++));
    const double z = (e - mc.p) / mc.se;
    c.check(fmt("exact(%g,%g,%g)", q.v_x, q.v_y, q.sigma), std::abs(z) <= 3.0,
            fmt("series %.6f mc %.6f se %.1e z=%.2f (|z| <= 3)", e, mc.p, mc.se, z));
  }
  double worst = 0.0;
  std::string where;
  int within = 0, total = 0;
  for (double vx : {1.0, 5.0, 15.0})
    for (double d = -3.0; d <= 5.0 + 1e-9; d += 0.5) {
      const double vy = vx + d;
      if (vy < 0.0 || d == 0.0) continue;
      const double e = pr_rice_greater_exact({vx, vy, 1.0});
      const double a = pr_rice_greater_empirical(vx, vy);
      const double r = std::abs(a / e - 1.0);
      ++total;
      within += r <= 0.1;
      if (r > worst) {
        worst = r;
        where = fmt("(%g, %g): approx %.3e exact %.3e", vx, vy, a, e);
      }
    }
  c.check("empirical", worst <= 0.1,
          fmt("%d of %d grid points within 10%%; worst %.1f%% at %s", within, total, 100 * worst, where.c_str()));
  const RicePair gp[] = {{30, 31, 1}, {30, 32, 1}, {40, 42, 1}, {50, 52, 1}};
  double gworst = 0.0;
  std::string gw;
  for (const RicePair& q : gp) {
    const Mc mc = monte_carlo(q, n, derive_seed(ctx.seed, 900 + i++));
    const double g = pr_rice_greater_gaussian(q);
    const double r = std::abs(g / mc.p - 1.0);
    c.note(fmt("gaussian(%g,%g,%g) = %.5f, mc %.5f, with sigma^2/2: %.5f", q.v_x, q.v_y, q.sigma, g, mc.p,
               pr_rice_greater_gaussian({q.v_x, q.v_y, q.sigma / std::sqrt(2.0)})));
    if (r > gworst) {
      gworst = r;
      gw = fmt("(%g, %g, %g)", q.v_x, q.v_y, q.sigma);
    }
  }
  c.check("gaussian", gworst <= 0.05, fmt("worst relative error %.1f%% at %s (<= 5%%)", 100 * gworst, gw.c_str()));
}

// ---------------------------------------------------------------- 9
double interp_log(const std::vector<ResultRow>& rows, FrameKind k, const std::string& m, double snr) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.kind == k && r.metric == m) pts.emplace_back(r.snr_db, r.value);
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    if (snr >= pts[i].first && snr <= pts[i + 1].first) {
      const double t = (snr - pts[i].first) / (pts[i + 1].first - pts[i].first);
      const double a = std::max(pts[i].second, 1e-300), b = std::max(pts[i + 1].second, 1e-300);
      return std::exp((1 - t) * std::log(a) + t * std::log(b));
    }
  return std::nan("");
}

void c9(Criterion& c, const Ctx& ctx) {
  ExperimentConfig cfg = base(ctx);
  cfg.targets = {TargetSpec{Window{4.417, 4.417}, Window{2.405, 2.405}, std::nullopt, 0.0}};
  cfg.snr_db = range(10.0, 30.0, 1.0);
  cfg.kinds = {FrameKind::ps, FrameKind::uw2};
  cfg.trials = 1000;
  auto rows = run_outlier_sweep(cfg);
  cfg.kinds = {FrameKind::ofdm, FrameKind::uw1};
  cfg.trials = 500;
  const auto more = run_outlier_sweep(cfg);
  rows.insert(rows.end(), more.begin(), more.end());

  for (FrameKind k : {FrameKind::ps, FrameKind::uw2}) {
    const std::string ks(to_string(k));
    for (const char* d : {"delay", "doppler"}) {
      int bad = 0;
      double worst = -1e9, at = 0.0;
      for (double s : range(10.0, 30.0, 1.0)) {
        const double p = value(rows, k, s, std::string("outlier_") + d);
        const double ub = value(rows, k, s, std::string("ub_") + d);
        const double se = std::sqrt(std::max(p * (1 - p), 1.0 / 1000) / 1000);
        const double z = (p - ub) / se;
        bad += z > 3.0;
        if (z > worst) {
          worst = z;
          at = s;
        }
      }
      c.check(fmt("%s.%s.sim_le_ub", ks.c_str(), d), bad == 0,
              fmt("%d SNR points with sim > UB + 3se; max (sim-UB)/se = %.2f at %.0f dB", bad, worst, at));
      const std::string m = std::string("outlier_") + d;
      const auto cross = crossing_snr(rows, k, m, 5e-2);
      if (cross) {
        const double ub = interp_log(rows, k, std::string("ub_") + d, *cross);
        c.check(fmt("%s.%s.ub_tightness", ks.c_str(), d), ub / 5e-2 <= 3.0,
                fmt("at the 5e-2 crossing (%.2f dB) UB = %.4f, UB/sim = %.2f (<= 3)", *cross, ub, ub / 5e-2));
      } else {
        c.check(fmt("%s.%s.ub_tightness", ks.c_str(), d), false, "no 5e-2 crossing in 10..30 dB");
      }
    }
  }
  const std::map<FrameKind, double> refs{{FrameKind::ofdm, 22.36}, {FrameKind::ps, 17.0}, {FrameKind::uw1, 20.0}, {FrameKind::uw2, 17.0}};
  for (FrameKind k : kAllKinds) {
    const std::string ks(to_string(k));
    const auto d = crossing_snr(rows, k, "outlier_delay", 5e-2);
    const auto n = crossing_snr(rows, k, "outlier_doppler", 5e-2);
    std::optional<double> both;
    if (d && n) both = std::max(*d, *n);
    const double ref = refs.at(k);
    c.check("waterfall." + ks, both && std::abs(*both - ref) <= 1.0,
            fmt("simulated outlier <= 5e-2 beyond %s (delay %s, doppler %s); reference %.2f dB +- 1", opt(both).c_str(),
                opt(d).c_str(), opt(n).c_str(), ref));
    const auto ud = crossing_snr(rows, k, "ub_delay", 5e-2);
    const auto fd = crossing_snr(rows, k, "outlier_delay_far", 5e-2);
    const auto fn = crossing_snr(rows, k, "outlier_doppler_far", 5e-2);
    c.note(fmt("%-4s UB delay crosses 5e-2 at %s; |error| > 1 bin crosses at %s (delay) / %s (doppler)", ks.c_str(),
               opt(ud).c_str(), opt(fd).c_str(), opt(fn).c_str()));
  }

  // random fractional DD: the averaged bound falls off more slowly than the fixed one
  const FrameConfig fc = link_config(FrameKind::uw2);
  const double G = static_cast<double>(processing_gain(FrameKind::uw2, fc));
  const auto ub_at = [&](double snr, bool random) {
    if (!random) return outlier_ub(FrameKind::uw2, fc, Target{4.417, 2.405, std::sqrt(db_to_lin(snr) / G), 0.0}, 1.0).delay;
    Rng rng(derive_seed(ctx.seed, 9));
    std::uniform_real_distribution<double> ut(3.5, 4.5), un(1.5, 2.5);
    double acc = 0.0;
    const int draws = 400;
    for (int i = 0; i < draws; ++i) {
      const double tau = ut(rng), nu = un(rng);
      acc += outlier_ub(FrameKind::uw2, fc, Target{tau, nu, std::sqrt(db_to_lin(snr) / G), 0.0}, 1.0).delay;
    }
    return acc / draws;
  };
  const double sf = std::log10(ub_at(18.0, false) / ub_at(24.0, false)) / 6.0;
  const double sr = std::log10(ub_at(18.0, true) / ub_at(24.0, true)) / 6.0;
  c.check("random_dd_shallower", sr < sf, fmt("UB decay 18->24 dB: fixed %.3f, random %.3f decades/dB", sf, sr));
}

// ---------------------------------------------------------------- 10
void c10(Criterion& c, const Ctx& ctx) {
  ExperimentConfig cfg = base(ctx);
  cfg.range.angles_deg = {120.0};
  const auto rows = run_range_analysis(cfg);
  const auto at = [&](FrameKind k, const std::string& m) { return value(rows, k, cfg.range.waterfall_snr_db.at(k), m); };
  for (FrameKind k : kAllKinds) {
    const std::string ks(to_string(k));
    const double iso = at(k, "outdoor.iso_range.120.0");
    const double want_iso = k == FrameKind::uw2 ? 230.0 : 375.0;
    c.check("iso." + ks, std::abs(iso - want_iso) <= 5.0, fmt("d_TR = %.1f m (%.0f +- 5)", iso, want_iso));
    const double cas = at(k, "outdoor.cassini.120.0");
    const double want_cas = k == FrameKind::ofdm ? 273.0 : k == FrameKind::ps ? 228.0 : 207.0;
    c.check("cassini." + ks, std::abs(cas - want_cas) <= 5.0, fmt("d_TR = %.1f m (%.0f +- 5)", cas, want_cas));
    const double enc = at(k, "indoor.cassini_encloses_iso");
    c.check("indoor_encloses." + ks, enc == 1.0, enc == 1.0 ? "cassini oval encloses the iso-range ellipse" : "not enclosed");
  }
  const double mr = at(FrameKind::uw2, "indoor.max_range");
  c.check("indoor_max_range.uw2", mr > 30.0, fmt("max d_TR = %.1f m (> 30)", mr));
}

// ---------------------------------------------------------------- 11
CVec column_sequence(const TxFrame& f, FrameKind kind, const FrameConfig& c, int m) {
  switch (kind) {
    case FrameKind::ofdm: return fft::inverse(f.target_payload[static_cast<size_t>(m)]);
    case FrameKind::ps: return fft::inverse(f.target_payload[static_cast<size_t>(m * c.pilot_spacing())]);
    case FrameKind::uw1: return zc_sequence(c.n_cp);
    case FrameKind::uw2: return zc_sequence(c.n_cp / 2);
  }
  return {};
}

void c11(Criterion& c, const Ctx& ctx) {
  // Fisher partials
  for (FrameKind k : kAllKinds) {
    const FrameConfig fc = link_config(k);
    const ParamVector th{Target{4.249, 2.237, 1.0, 0.3}};
    const auto parts = signal_partials(th, k, fc);
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
      ParamVector p = th, m = th;
      double* fp[4] = {&p[0].tau, &p[0].nu, &p[0].gain_mag, &p[0].gain_phase};
      double* fm[4] = {&m[0].tau, &m[0].nu, &m[0].gain_mag, &m[0].gain_phase};
      const double h = 1e-5;
      *fp[i] += h;
      *fm[i] -= h;
      const CVec fd = (noiseless_signal(p, k, fc).data.reshaped() - noiseless_signal(m, k, fc).data.reshaped()) / (2 * h);
      worst = std::max(worst, (parts[static_cast<size_t>(i)] - fd).norm() / fd.norm());
    }
    c.check("partials." + std::string(to_string(k)), worst < 1e-4, fmt("max relative error %.2e (< 1e-4)", worst));
  }
  // rank-1 identity on the circular, constant-phase-per-block model
  for (FrameKind k : kAllKinds) {
    const FrameConfig fc = link_config(k);
    Rng rng(derive_seed(ctx.seed, 11));
    const TxFrame f = build_frame(fc, rng);
    const int L = fc.fast_len(), R = fc.slow_len();
    const double tau = 4.249, nu = 2.237;
    const cd h = std::polar(0.8, 0.4);
    const RVec g = periodic_taps(tau, L, fc.rc.alpha, fc.rc.half_span);
    SampleGrid y;
    y.kind = k;
    y.data.resize(L, R);
    for (int m = 0; m < R; ++m) {
      const CVec x = column_sequence(f, k, fc, m);
      const cd u = std::polar(1.0, -2.0 * kPi * nu * m / R);
      for (int n = 0; n < L; ++n) {
        cd acc = 0;
        for (int i = 0; i < L; ++i) acc += x[i] * g[((n - i) % L + L) % L];
        y.data(n, m) = h * u * acc;
      }
    }
    const ChannelEstimate H = estimate_channel(y, f, fc);
    const CMat psi = signature(k, fc, nu, tau);
    const cd hp = (psi.adjoint() * H.data).trace() / psi.squaredNorm();
    const double res = (H.data - hp * psi).norm() / H.data.norm();
    c.check("rank_one." + std::string(to_string(k)), res < 1e-3,
            fmt("residual %.2e (< 1e-3), |h'|/|h| = %.4f (sqrt L = %.4f)", res, std::abs(hp) / 0.8, std::sqrt(double(L))));
  }
  // common timing/frequency offset leaves the target-to-LoS offsets unchanged
  for (FrameKind k : {FrameKind::ps, FrameKind::uw2}) {
    const FrameConfig fc = link_config(k);
    const auto run = [&](double dt, double dn) {
      Scene s;
      s.targets = {Target{4.249 + dt, 2.237 + dn, 1.0, 0.3}};
      s.los = Target{0.1 + dt, 0.02 + dn, 5.0, 1.2};
      s.beta = 0.1;
      s.noise_power = 0.0;
      Rng rng(derive_seed(ctx.seed, 12));
      const TxFrame f = build_frame(fc, rng);
      const RxStreams rx = simulate_rx(f, s, fc, rng);
      const ChannelEstimate H = estimate_channel(sample_grid(rx.target, k, fc), f, fc, Stream::target);
      const ChannelEstimate Hl = estimate_channel(sample_grid(rx.los, k, fc), f, fc, Stream::los);
      EstimatorConfig est;
      est.n_iterations = 2;
      return multi_target_estimate(H, &Hl, fc, est);
    };
    const MultiTargetResult a = run(0.0, 0.0);
    double worst = 0.0;
    for (auto [dt, dn] : {std::pair{0.35, -0.6}, {0.2, 0.45}, {0.7, 0.1}}) {
      const MultiTargetResult b = run(dt, dn);
      worst = std::max({worst, std::abs(a.targets[0].tau_offset - b.targets[0].tau_offset),
                        std::abs(a.targets[0].nu_offset - b.targets[0].nu_offset)});
    }
    c.check("offset_cancellation." + std::string(to_string(k)), worst <= 2.0 / 256,
            fmt("max offset change %.2e under 3 common shifts (<= 2/256)", worst));
  }
  // contour residuals
  {
    double worst = 0.0;
    for (const char* preset : {"outdoor", "indoor"}) {
      const SystemBudget b = budget_preset(preset);
      for (FrameKind k : kAllKinds) {
        const FrameConfig fc = system_config(k);
        const double tau = max_unambiguous(k, fc, b.bandwidth).tau_max;
        const double dmax = tau * kSpeedOfLight + b.d_br;
        for (const auto& loop : iso_range_contour(tau, b.d_br, 3600).loops)
          for (const Point2& p : loop)
            worst = std::max(worst, std::abs((std::hypot(p.x + b.d_br / 2, p.y) + std::hypot(p.x - b.d_br / 2, p.y)) / dmax - 1));
        const double G = static_cast<double>(processing_gain(k, fc));
        for (double snr : {17.0, 22.36, 40.0, 70.0}) {
          const CassiniOval ov = cassini_oval(db_to_lin(snr), G, b, b.noise_power(), 3600);
          for (const auto& loop : ov.contour.loops)
            for (const Point2& p : loop)
              worst = std::max(worst, std::abs(std::hypot(p.x + b.d_br / 2, p.y) * std::hypot(p.x - b.d_br / 2, p.y) / ov.b2 - 1));
        }
      }
    }
    c.check("contours", worst < 1e-9, fmt("max relative defining-property residual %.2e (< 1e-9)", worst));
  }
  // byte-identical tables across thread counts
  {
    ExperimentConfig cfg = los_scene(ctx, FrameKind::uw2, 0.1, {15.0, 30.0}, 60);
    cfg.kinds = {FrameKind::ps, FrameKind::uw1, FrameKind::uw2};
    std::string ref;
    bool same = true;
    for (int th : {1, 2, 4, 8}) {
      cfg.threads = th;
      std::ostringstream os;
      write_csv(os, run_rmse_sweep(cfg));
      write_json(os, run_outlier_sweep(cfg));
      if (ref.empty()) ref = os.str();
      same = same && os.str() == ref;
    }
    c.check("reproducibility", same, fmt("rmse and outlier tables identical for 1/2/4/8 threads (%zu bytes)", ref.size()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uwisac acceptance checks"};
  Ctx ctx;
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (default all)");
  app.add_option("--threads", ctx.threads, "worker threads (0 = hardware)");
  app.add_option("--seed", ctx.seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  const auto want = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };
  using Clock = std::chrono::steady_clock;
  const auto run = [&](int n, const char* title, const std::function<void(Criterion&)>& fn) {
    if (!want(n)) return;
    Criterion c{n, title, {}, {}};
    const auto t0 = Clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.check("exception", false, e.what());
    }
    report(c, std::chrono::duration<double>(Clock::now() - t0).count());
  };

  run(1, "l_ofdm reference values", [&](Criterion& c) { c1(c, ctx); });
  run(2, "processing gains and data rate", [&](Criterion& c) { c2(c, ctx); });
  std::optional<SingleTargetSweep> f5;
  if (want(3) || want(4)) {
    const auto t0 = Clock::now();
    f5 = single_target_sweep(ctx);
    std::printf("     shared single-target sweep: %.1f s\n", std::chrono::duration<double>(Clock::now() - t0).count());
  }
  run(3, "CRB attainment", [&](Criterion& c) { c3(c, *f5); });
  run(4, "integer-grid floor", [&](Criterion& c) { c4(c, *f5); });
  run(5, "UW1 interference power", [&](Criterion& c) { c5(c, ctx); });
  run(6, "LoS removal", [&](Criterion& c) { c6(c, ctx); });
  run(7, "multi-target floors", [&](Criterion& c) { c7(c, ctx); });
  run(8, "Rician ratio numerics", [&](Criterion& c) { c8(c, ctx); });
  run(9, "outlier bound", [&](Criterion& c) { c9(c, ctx); });
  run(10, "range geometry", [&](Criterion& c) { c10(c, ctx); });
  run(11, "property suites", [&](Criterion& c) { c11(c, ctx); });

  std::printf("summary: %d unexpected failure(s), %d known deviation(s)\n", g_unexpected, g_known);
  return g_unexpected == 0 ? 0 : 1;
}
