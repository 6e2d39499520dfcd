#include "uwisac/ddest.hpp"

#include <cmath>

#include "uwisac/pulse.hpp"

namespace uwisac {

void EstimatorConfig::validate() const {
  if (n_grid < 2 || (n_grid & (n_grid - 1)) != 0) throw ConfigError("n_grid must be a power of two >= 2");
  if (n_iterations < 1) throw ConfigError("n_iterations must be >= 1");
  if (n_targets < 1) throw ConfigError("n_targets must be >= 1");
}

int EstimatorConfig::refine_steps() const {
  int s = 0;
  for (int g = n_grid; g > 1; g >>= 1) ++s;
  return s;
}

long long round_half_away(double x) { return static_cast<long long>(std::round(x)); }

int wrap_index(long long i, int n) {
  long long r = i % n;
  if (r < 0) r += n;
  return static_cast<int>(r);
}

double wrap_signed(double x, int n) {
  const double h = n / 2.0;
  double r = std::fmod(x + h, static_cast<double>(n));
  if (r < 0) r += n;
  return r - h;
}

CMat signature(FrameKind kind, const FrameConfig& config, double nu, double tau) {
  const FrameConfig c = config.with_kind(kind);
  const CVec v = doppler_vector(c.slow_len(), nu);
  const RVec g = periodic_taps(tau, c.fast_len(), c.rc.alpha, c.rc.half_span);
  return v * g.transpose().cast<cd>();
}

GridPeak integer_grid_estimate(const ChannelEstimate& H, int search_cols) {
  GridPeak best;
  double bv = -1.0;
  const int R = static_cast<int>(H.data.rows());
  const int C = std::min(search_cols, static_cast<int>(H.data.cols()));
  for (int m = 0; m < R; ++m) {
    for (int k = 0; k < C; ++k) {
      const double v = std::norm(H.data(m, k));
      if (v > bv) {
        bv = v;
        best = {m, k};
      }
    }
  }
  return best;
}

GridPeak integer_grid_estimate(const ChannelEstimate& H, const FrameConfig& config) {
  return integer_grid_estimate(H, config.with_kind(H.kind).search_len());
}

namespace {

struct Searcher {
  const CMat& HS;  // searched columns only
  int R;
  int L;
  double alpha;
  int half_span;
  int contractions = 0;

  RVec taps(double tau) const { return periodic_taps(tau, L, alpha, half_span).head(HS.cols()); }

  static double value(cd inner, double gnorm2, int R) {
    if (gnorm2 <= 0.0) return 0.0;
    return std::norm(inner) / (R * gnorm2);
  }

  // w = v^H H_S
  Eigen::RowVectorXcd delay_profile(double nu) {
    ++contractions;
    return doppler_vector(R, nu).adjoint() * HS;
  }

  // z = H_S g
  CVec doppler_profile(const RVec& g) {
    ++contractions;
    return HS * g.cast<cd>();
  }

  double at(double nu, double tau) const {
    const RVec g = taps(tau);
    const cd inner = doppler_vector(R, nu).adjoint() * HS * g.cast<cd>();
    return value(inner, g.squaredNorm(), R);
  }
};

}  // namespace

double fine_objective(const ChannelEstimate& H, const FrameConfig& config, double nu, double tau) {
  const FrameConfig c = config.with_kind(H.kind);
  const CMat HS = H.data.leftCols(std::min<Eigen::Index>(c.search_len(), H.data.cols()));
  Searcher s{HS, static_cast<int>(H.data.rows()), static_cast<int>(H.data.cols()), c.rc.alpha, c.rc.half_span};
  return s.at(nu, tau);
}

RefineResult fine_grid_refine(const ChannelEstimate& H, const FrameConfig& config, GridPeak init,
                              const EstimatorConfig& est) {
  est.validate();
  const FrameConfig c = config.with_kind(H.kind);
  const int R = static_cast<int>(H.data.rows());
  const CMat HS = H.data.leftCols(std::min<Eigen::Index>(c.search_len(), H.data.cols()));
  Searcher s{HS, R, static_cast<int>(H.data.cols()), c.rc.alpha, c.rc.half_span};

  double nu = init.m;
  double tau = init.k;
  RefineResult out;
  out.objective_init = s.at(nu, tau);
  double cur = out.objective_init;
  double step = 0.5;
  for (int it = 0; it < est.refine_steps(); ++it, step *= 0.5) {
    {
      const Eigen::RowVectorXcd w = s.delay_profile(nu);
      for (double cand : {tau - step, tau + step}) {
        const RVec g = s.taps(cand);
        const double v = Searcher::value(w * g.cast<cd>(), g.squaredNorm(), R);
        if (v > cur) {
          cur = v;
          tau = cand;
        }
      }
    }
    {
      const RVec g = s.taps(tau);
      const CVec z = s.doppler_profile(g);
      const double gn = g.squaredNorm();
      const double base_nu = nu;
      for (double cand : {base_nu - step, base_nu + step}) {
        const double v = Searcher::value(doppler_vector(R, cand).dot(z), gn, R);
        if (v > cur) {
          cur = v;
          nu = cand;
        }
      }
    }
  }
  out.nu_hat = wrap_signed(nu, R);
  out.tau_hat = tau;
  out.objective = cur;
  out.contractions = s.contractions;
  return out;
}

cd estimate_gain(const ChannelEstimate& H, const CMat& psi, int m, int k) {
  const cd den = psi(m, k);
  if (std::abs(den) < 1e-9) throw DegenerateEstimate("signature vanishes at the rounded peak");
  return H.data(m, k) / den;
}

cd estimate_gain_at(const ChannelEstimate& H, const FrameConfig& config, double nu, double tau) {
  const CMat psi = signature(H.kind, config, nu, tau);
  const int m = wrap_index(round_half_away(nu), static_cast<int>(H.data.rows()));
  const int k = wrap_index(round_half_away(tau), static_cast<int>(H.data.cols()));
  return estimate_gain(H, psi, m, k);
}

MultiTargetResult multi_target_estimate(const ChannelEstimate& H, const ChannelEstimate* H_los,
                                        const FrameConfig& config, const EstimatorConfig& est) {
  est.validate();
  const FrameKind kind = H.kind;
  if (H_los && kind == FrameKind::ofdm)
    throw ConfigError("LoS interference removal is not supported for OFDM frames");
  const int R = static_cast<int>(H.data.rows());
  const int P = est.n_targets;

  MultiTargetResult res;
  CMat los_term = CMat::Zero(H.data.rows(), H.data.cols());
  if (H_los) {
    const GridPeak pk = integer_grid_estimate(*H_los, config);
    const RefineResult r = fine_grid_refine(*H_los, config, pk, est);
    res.los.nu_hat = r.nu_hat;
    res.los.tau_hat = r.tau_hat;
    const CMat psi = signature(kind, config, r.nu_hat, r.tau_hat);
    const int m = wrap_index(round_half_away(r.nu_hat), R);
    const int k = wrap_index(round_half_away(r.tau_hat), static_cast<int>(H.data.cols()));
    res.los.gain_hat = estimate_gain(H, psi, m, k);
    los_term = res.los.gain_hat * psi;
    res.los_removed = true;
  }

  res.targets.assign(static_cast<size_t>(P), DDEstimate{});
  std::vector<CMat> terms(static_cast<size_t>(P), CMat::Zero(H.data.rows(), H.data.cols()));
  ChannelEstimate Hp;
  Hp.kind = kind;
  for (int it = 0; it < est.n_iterations; ++it) {
    for (int p = 0; p < P; ++p) {
      Hp.data = H.data - los_term;
      for (int q = 0; q < P; ++q)
        if (q != p) Hp.data -= terms[static_cast<size_t>(q)];
      const GridPeak pk = integer_grid_estimate(Hp, config);
      const RefineResult r = fine_grid_refine(Hp, config, pk, est);
      res.contractions += r.contractions;
      auto& e = res.targets[static_cast<size_t>(p)];
      e.nu_hat = r.nu_hat;
      e.tau_hat = r.tau_hat;
      const CMat psi = signature(kind, config, r.nu_hat, r.tau_hat);
      const int m = wrap_index(round_half_away(r.nu_hat), R);
      const int k = wrap_index(round_half_away(r.tau_hat), static_cast<int>(H.data.cols()));
      e.gain_hat = estimate_gain(Hp, psi, m, k);
      terms[static_cast<size_t>(p)] = e.gain_hat * psi;
    }
  }
  for (auto& e : res.targets) {
    e.tau_offset = e.tau_hat - res.los.tau_hat;
    e.nu_offset = wrap_signed(e.nu_hat - res.los.nu_hat, R);
  }
  return res;
}

}  // namespace uwisac
