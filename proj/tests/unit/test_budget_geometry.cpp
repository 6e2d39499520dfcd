#include <gtest/gtest.h>

#include <cmath>

#include "uwisac/budget_geometry.hpp"
#include "uwisac/frames.hpp"

using namespace uwisac;

namespace {

double d_bt(Point2 p, double d_br) { return std::hypot(p.x + d_br / 2, p.y); }
double d_tr(Point2 p, double d_br) { return std::hypot(p.x - d_br / 2, p.y); }

}  // namespace

TEST(Budget, PresetsAndValidation) {
  const SystemBudget o = outdoor_budget();
  EXPECT_DOUBLE_EQ(o.bandwidth, 122.88e6);
  EXPECT_NEAR(o.tx_power, 0.25, 1e-3);
  EXPECT_NEAR(o.wavelength(), kSpeedOfLight / 28e9, 1e-15);
  EXPECT_NEAR(lin_to_db(o.noise_power()) + 30.0, -174.0 + lin_to_db(122.88e6), 1e-9);
  EXPECT_NO_THROW(o.validate());
  const SystemBudget i = indoor_budget();
  EXPECT_DOUBLE_EQ(i.bandwidth, 491.52e6);
  EXPECT_DOUBLE_EQ(i.d_br, 20.0);
  EXPECT_DOUBLE_EQ(i.rcs, 1.0);
  SystemBudget bad = o;
  bad.rcs = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_DOUBLE_EQ(dbm_to_watt(30.0), 1.0);
  EXPECT_NEAR(db_to_lin(lin_to_db(7.3)), 7.3, 1e-12);
}

TEST(FrameTradeoffs, ProcessingGains) {
  const FrameConfig c = link_config();
  EXPECT_EQ(processing_gain(FrameKind::ofdm, c), 8192);
  EXPECT_EQ(processing_gain(FrameKind::ps, c), 1024);
  EXPECT_EQ(processing_gain(FrameKind::uw1, c), 2048);
  EXPECT_EQ(processing_gain(FrameKind::uw2, c), 1024);
  const FrameConfig s = system_config();
  EXPECT_EQ(processing_gain(FrameKind::ofdm, s), 140 * 1024);
  EXPECT_EQ(processing_gain(FrameKind::ps, s), 20 * 1024);
  EXPECT_EQ(processing_gain(FrameKind::uw1, s), 140 * 204);
  EXPECT_EQ(processing_gain(FrameKind::uw2, s), 140 * 102);
}

TEST(FrameTradeoffs, DataRateAdvantage) {
  EXPECT_NEAR(100.0 * data_rate_loss(FrameKind::ps, 140, 20), 14.2857, 1e-4);
  // UW keeps every sub-block for data: (M - M_p)/M_p relative gain over PS
  EXPECT_NEAR(100.0 * (1.0 / (1.0 - data_rate_loss(FrameKind::ps, 140, 20)) - 1.0), 16.67, 0.005);
  EXPECT_EQ(data_rate_loss(FrameKind::uw2, 140, 20), 0.0);
}

TEST(FrameTradeoffs, ResolutionAndMaxima) {
  const FrameConfig s = system_config();
  const double B = 122.88e6;
  const Resolution r = resolution(s, B);
  EXPECT_NEAR(r.delta_tau * 1e9, 8.138, 5e-4);
  EXPECT_NEAR(r.delta_nu, B / (140.0 * 1228.0), 1e-9);
  const Resolution f = resolution(s, B, 256);
  EXPECT_NEAR(f.delta_tau, r.delta_tau / 256, 1e-20);
  EXPECT_NEAR(max_unambiguous(FrameKind::uw2, s, B).tau_max * 1e9, 822, 0.5);
  EXPECT_NEAR(max_unambiguous(FrameKind::uw1, s, B).tau_max * 1e9, 1652, 0.5);
  EXPECT_NEAR(max_unambiguous(FrameKind::ofdm, s, B).tau_max, max_unambiguous(FrameKind::uw1, s, B).tau_max, 1e-18);
  EXPECT_NEAR(204 / B * 1e9, 1660, 1.0);
  EXPECT_NEAR(200 / B * 1e9, 1627, 1.0);
  // PS Doppler is pilot limited
  EXPECT_NEAR(max_unambiguous(FrameKind::ps, s, B).nu_max, 9 * r.delta_nu, 1e-9);
  EXPECT_NEAR(max_unambiguous(FrameKind::uw2, s, B).nu_max, 69 * r.delta_nu, 1e-9);
  EXPECT_THROW(resolution(s, 0.0), ConfigError);
}

TEST(FrameTradeoffs, Complexity) {
  const FrameConfig c = link_config();
  EXPECT_NEAR(receiver_complexity(FrameKind::ofdm, c, 0), 8192.0 * (std::log2(64.0 * 128 * 128) + 1), 1e-6);
  const double o = receiver_complexity(FrameKind::ofdm, c, 256);
  const double u1 = receiver_complexity(FrameKind::uw1, c, 256);
  const double u2 = receiver_complexity(FrameKind::uw2, c, 256);
  EXPECT_LT(u2, u1);
  EXPECT_LT(u1, o);
  EXPECT_EQ(fine_grid_count(8, 2, 256), 256);
  EXPECT_EQ(fine_grid_count(1, 1, 2), 2);
}

TEST(Sinr, Uw1Limits) {
  const double G = 2048;
  EXPECT_NEAR(sinr_uw1(1.0, G, 0.0), 0.5, 1e-3);
  EXPECT_NEAR(sinr_uw1(G, G, 0.0), G / 3, 1e-9);
  EXPECT_NEAR(sinr_uw1(1e12, G, 0.0), G, 1e-2);
  EXPECT_DOUBLE_EQ(snr_loss_uw1(G, G, 24.41), 27.41);
  EXPECT_DOUBLE_EQ(radar_snr(1024, 0.5, 2.0), 256.0);
  EXPECT_THROW(radar_snr(1024, 0.5, 0.0), ConfigError);
}

TEST(TargetGain, FrozenAndHomogeneous) {
  const SystemBudget o = outdoor_budget();
  EXPECT_NEAR(target_gain(200, 200, o) / 1.924100409516306e-15, 1.0, 1e-12);
  EXPECT_NEAR(target_gain(400, 400, o) / target_gain(200, 200, o), std::pow(2.0, -2 * 2.3), 1e-12);
  SystemBudget e = o;
  e.path_loss_exp = 2.0;
  const double lam = e.wavelength();
  const double classic =
      e.tx_power * e.gain_bs * e.gain_r * lam * lam * e.rcs / (std::pow(4 * kPi, 3) * 150.0 * 150.0 * 90.0 * 90.0);
  EXPECT_NEAR(target_gain(150, 90, e) / classic, 1.0, 1e-12);
  EXPECT_THROW(target_gain(0, 1, o), ConfigError);
}

TEST(IsoRange, DefiningPropertyAndVertex) {
  const double d_br = 200, tau = 822e-9;
  const Contour c = iso_range_contour(tau, d_br, 720);
  ASSERT_EQ(c.loops.size(), 1u);
  const double d_max = tau * kSpeedOfLight + d_br;
  EXPECT_NEAR(c.loops[0][0].x, d_max / 2, 1e-9);
  EXPECT_NEAR(c.loops[0][0].y, 0.0, 1e-12);
  for (const Point2& p : c.loops[0]) EXPECT_NEAR((d_bt(p, d_br) + d_tr(p, d_br)) / d_max, 1.0, 1e-9);
  EXPECT_THROW(iso_range_contour(-1, d_br, 10), ConfigError);
}

TEST(IsoRange, FocalChordTowardTheBs) {
  const double d_br = 200, tau = 822e-9;
  const Contour c = iso_range_contour(tau, d_br, 20000);
  const double d_max = tau * kSpeedOfLight + d_br;
  // the point straight toward the other focus lies at the far vertex
  const auto r = range_at_angle(c, d_br, 180.0);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, d_max / 2 + d_br / 2, 1e-6);
  const auto q = range_at_angle(c, d_br, 0.0);
  EXPECT_NEAR(*q, d_max / 2 - d_br / 2, 1e-6);
}

TEST(RangeAtAngle, CircleAroundRadar) {
  const double d_br = 50, rad = 12.5;
  Contour c;
  c.loops.emplace_back();
  for (int i = 0; i < 4000; ++i) {
    const double t = 2 * kPi * i / 4000;
    c.loops[0].push_back({d_br / 2 + rad * std::cos(t), rad * std::sin(t)});
  }
  for (double th = 0; th < 360; th += 17.5) EXPECT_NEAR(*range_at_angle(c, d_br, th), rad, 1e-5) << th;
  Contour far;
  far.loops.push_back({{100, 1}, {101, 1}, {101, 2}});
  EXPECT_FALSE(range_at_angle(far, d_br, 180.0).has_value());
}

TEST(Cassini, DefiningPropertyAndSymmetry) {
  const SystemBudget o = outdoor_budget();
  for (double snr_db : {17.0, 22.36, 40.0, 60.0}) {
    const CassiniOval ov = cassini_oval(db_to_lin(snr_db), 140 * 102, o, o.noise_power(), 2000);
    for (const auto& loop : ov.contour.loops) {
      for (const Point2& p : loop) EXPECT_NEAR(d_bt(p, o.d_br) * d_tr(p, o.d_br) / ov.b2, 1.0, 1e-9);
      // each upper point has its mirror
      for (const Point2& p : loop) {
        bool found = false;
        for (const Point2& q : loop) found |= std::abs(q.x - p.x) < 1e-12 && std::abs(q.y + p.y) < 1e-12;
        EXPECT_TRUE(found);
        if (!found) break;
      }
    }
  }
}

TEST(Cassini, TopologySplitsAtTheBaseline) {
  const SystemBudget o = outdoor_budget();
  const double G = 140 * 102;
  // b = d_BR/2 separates one loop from two
  const double b2_mid = o.d_br * o.d_br / 4;
  for (double snr_db : {-20.0, 0.0, 20.0, 40.0, 60.0, 80.0}) {
    const CassiniOval ov = cassini_oval(db_to_lin(snr_db), G, o, o.noise_power(), 400);
    EXPECT_EQ(ov.contour.loops.size(), ov.b2 >= b2_mid ? 1u : 2u) << snr_db;
  }
  EXPECT_THROW(cassini_oval(0.0, G, o, o.noise_power(), 400), ConfigError);
}

TEST(Cassini, B2Homogeneity) {
  const SystemBudget o = outdoor_budget();
  const double a = cassini_b2(10.0, 1024, o, o.noise_power());
  const double b = cassini_b2(20.0, 1024, o, o.noise_power());
  EXPECT_NEAR(b / a, std::pow(0.5, 1 / 2.3), 1e-12);
  // b^2 is the product distance at which the target SNR is reached
  const double d = std::sqrt(a);
  EXPECT_NEAR(radar_snr(1024, target_gain(d, d, o), o.noise_power()), 10.0, 1e-9);
}
