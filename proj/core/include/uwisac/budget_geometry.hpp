#pragma once

#include <optional>
#include <vector>

#include "uwisac/types.hpp"

namespace uwisac {

struct SystemBudget {
  double bandwidth = 122.88e6;   // Hz
  double carrier = 28e9;         // Hz
  double tx_power = 0.25;        // W
  double gain_bs = 8.0;
  double gain_r = 64.0;
  double rcs = 10.0;             // m^2
  double path_loss_exp = 2.3;
  double d_br = 200.0;           // m
  double noise_psd = 3.981071705534972e-21;  // W/Hz, -174 dBm/Hz

  void validate() const;
  double wavelength() const { return kSpeedOfLight / carrier; }
  double noise_power() const { return noise_psd * bandwidth; }
};

// 120 kHz spacing, 200 m baseline, 10 m^2 target
SystemBudget outdoor_budget();
// 480 kHz spacing, 20 m baseline, 1 m^2 target
SystemBudget indoor_budget();

double dbm_to_watt(double dbm);
double db_to_lin(double db);
double lin_to_db(double lin);

long long processing_gain(FrameKind kind, const FrameConfig& config);

struct Resolution {
  double delta_tau = 0.0;  // s
  double delta_nu = 0.0;   // Hz
};
Resolution resolution(const FrameConfig& config, double bandwidth, int n_grid = 1);

struct MaxDD {
  double tau_max = 0.0;  // s
  double nu_max = 0.0;   // Hz
};
MaxDD max_unambiguous(FrameKind kind, const FrameConfig& config, double bandwidth);

// multiplications of the receiver chain including n_fg fine-grid contractions
double receiver_complexity(FrameKind kind, const FrameConfig& config, long long n_fg);
long long fine_grid_count(int n_iterations, int n_targets, int n_grid);

double radar_snr(double G, double gain_sq, double noise_power);
double snr_loss_uw1(double rho, double G, double los_term);
double sinr_uw1(double rho, double G, double los_term);

double target_gain(double d_bt, double d_tr, const SystemBudget& budget);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Contour {
  // closed loops; the ellipse and single-oval Cassini curves have one loop
  std::vector<std::vector<Point2>> loops;
};

Contour iso_range_contour(double tau_max, double d_br, int n_points);

struct CassiniOval {
  double b2 = 0.0;
  Contour contour;
};

// b^2 = (P G G_bs G_r lambda^2 rcs / (rho* sigma^2 (4 pi)^3))^(1/eta)
double cassini_b2(double target_snr, double G, const SystemBudget& budget, double noise_power);
CassiniOval cassini_oval(double target_snr, double G, const SystemBudget& budget, double noise_power,
                         int n_points);

// distance from the radar at (+d_br/2, 0) along bearing theta (degrees from +x)
std::optional<double> range_at_angle(const Contour& contour, double d_br, double theta_deg);

}  // namespace uwisac
