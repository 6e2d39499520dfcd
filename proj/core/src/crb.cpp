#include "uwisac/crb.hpp"

#include <cmath>
#include <sstream>

#include "uwisac/pulse.hpp"

namespace uwisac {
namespace {

struct Layout {
  int L = 0;
  int Ms = 0;
  std::vector<int> idx;   // primary stream index per entry, column-major (k fastest)
  std::vector<int> idx2;  // CP-restoration partner (UW1), else empty
};

Layout layout(FrameKind kind, const FrameConfig& c) {
  Layout lay;
  lay.L = c.fast_len();
  lay.Ms = c.slow_len();
  lay.idx.reserve(static_cast<size_t>(lay.L * lay.Ms));
  for (int m = 0; m < lay.Ms; ++m)
    for (int k = 0; k < lay.L; ++k) lay.idx.push_back(grid_index(kind, c, k, m));
  if (kind == FrameKind::uw1) {
    lay.idx2 = lay.idx;
    for (auto& i : lay.idx2) i += c.n_cp;
  }
  return lay;
}

struct Taps {
  int d = 0;
  int jlo = 0;
  std::vector<double> g;
  std::vector<double> dg;  // d/dtau
};

Taps make_taps(double tau, const RcFilter& rcf) {
  Taps t;
  t.d = static_cast<int>(std::floor(tau));
  const double f = tau - t.d;
  t.jlo = -rcf.half_span;
  const int jhi = rcf.half_span + 1;
  for (int j = t.jlo; j <= jhi; ++j) {
    const double a = j - f;
    const bool in = std::abs(a) <= rcf.half_span;
    t.g.push_back(in ? rc(a, rcf.alpha) : 0.0);
    t.dg.push_back(in ? -rc_deriv(a, rcf.alpha) : 0.0);
  }
  return t;
}

// (sum_j x[n-d-j] g[j], sum_j x[n-d-j] dg[j])
std::pair<cd, cd> conv_at(const CVec& x, int n, const Taps& t) {
  cd a(0, 0), b(0, 0);
  const int N = static_cast<int>(x.size());
  const int base = n - t.d;
  for (size_t q = 0; q < t.g.size(); ++q) {
    const int i = base - (t.jlo + static_cast<int>(q));
    if (i < 0 || i >= N) continue;
    a += x[i] * t.g[q];
    b += x[i] * t.dg[q];
  }
  return {a, b};
}

const TxFrame& frame_or_reference(const TxFrame* frame, const FrameConfig& c, TxFrame& holder) {
  if (frame) return *frame;
  holder = reference_frame(c);
  return holder;
}

}  // namespace

SampleGrid noiseless_signal(const ParamVector& theta, FrameKind kind, const FrameConfig& config,
                            const TxFrame* frame) {
  const FrameConfig c = config.with_kind(kind);
  TxFrame holder;
  const TxFrame& f = frame_or_reference(frame, c, holder);
  const Layout lay = layout(kind, c);
  SampleGrid out;
  out.kind = kind;
  out.data = CMat::Zero(lay.L, lay.Ms);
  const double nx = c.n_x();
  for (const auto& p : theta) {
    if (p.gain_mag == 0.0) continue;
    const Taps t = make_taps(p.tau, c.rc);
    const cd h = p.gain();
    for (size_t e = 0; e < lay.idx.size(); ++e) {
      const int n = lay.idx[e];
      cd v = conv_at(f.target_stream, n, t).first * std::polar(1.0, -2.0 * kPi * p.nu * n / nx);
      if (!lay.idx2.empty()) {
        const int n2 = lay.idx2[e];
        v += conv_at(f.target_stream, n2, t).first * std::polar(1.0, -2.0 * kPi * p.nu * n2 / nx);
      }
      out.data(static_cast<Eigen::Index>(e) % lay.L, static_cast<Eigen::Index>(e) / lay.L) += h * v;
    }
  }
  return out;
}

std::vector<CVec> signal_partials(const ParamVector& theta, FrameKind kind, const FrameConfig& config,
                                  const TxFrame* frame) {
  const FrameConfig c = config.with_kind(kind);
  TxFrame holder;
  const TxFrame& f = frame_or_reference(frame, c, holder);
  const Layout lay = layout(kind, c);
  const auto E = static_cast<Eigen::Index>(lay.idx.size());
  const double nx = c.n_x();
  std::vector<CVec> parts;
  for (const auto& p : theta) {
    CVec dtau(E), dnu(E), dmag(E), dphase(E);
    const Taps t = make_taps(p.tau, c.rc);
    const cd h = p.gain();
    const cd unit = std::polar(1.0, p.gain_phase);
    for (Eigen::Index e = 0; e < E; ++e) {
      cd s(0, 0), sd(0, 0), sn(0, 0);
      auto accumulate = [&](int n) {
        const auto [a, b] = conv_at(f.target_stream, n, t);
        const cd ph = std::polar(1.0, -2.0 * kPi * p.nu * n / nx);
        s += ph * a;
        sd += ph * b;
        sn += ph * a * cd(0.0, -2.0 * kPi * n / nx);
      };
      accumulate(lay.idx[static_cast<size_t>(e)]);
      if (!lay.idx2.empty()) accumulate(lay.idx2[static_cast<size_t>(e)]);
      dtau[e] = h * sd;
      dnu[e] = h * sn;
      dmag[e] = unit * s;
      dphase[e] = cd(0.0, 1.0) * h * s;
    }
    parts.push_back(dtau);
    parts.push_back(dnu);
    parts.push_back(dmag);
    parts.push_back(dphase);
  }
  return parts;
}

double effective_noise(const ParamVector& theta, FrameKind kind, const FrameConfig& config, double noise_power) {
  switch (kind) {
    case FrameKind::ofdm: return noise_power * l_ofdm(config.qam_order);
    case FrameKind::uw1: {
      double p = 0.0;
      for (const auto& t : theta) p += t.gain_mag * t.gain_mag;
      return 2.0 * noise_power + p;
    }
    default: return noise_power;
  }
}

RMat fisher_matrix(const ParamVector& theta, FrameKind kind, const FrameConfig& config, double noise_power,
                   const TxFrame* frame) {
  if (!(noise_power > 0.0)) throw ConfigError("noise power must be positive");
  const auto parts = signal_partials(theta, kind, config, frame);
  const double s2 = effective_noise(theta, kind, config, noise_power);
  const auto n = static_cast<Eigen::Index>(parts.size());
  RMat F(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = 2.0 / s2 * parts[static_cast<size_t>(j)].dot(parts[static_cast<size_t>(i)]).real();
      F(i, j) = v;
      F(j, i) = v;
    }
  }
  return F;
}

CrbResult crb(const ParamVector& theta, FrameKind kind, const FrameConfig& config, double noise_power,
              const TxFrame* frame) {
  const RMat F = fisher_matrix(theta, kind, config, noise_power, frame);
  const auto n = F.rows();
  RVec dscale(n);
  for (Eigen::Index i = 0; i < n; ++i) dscale[i] = F(i, i) > 0.0 ? 1.0 / std::sqrt(F(i, i)) : 0.0;
  const RMat Fs = dscale.asDiagonal() * F * dscale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMat> es(Fs);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(dscale.minCoeff() > 0.0) || !(cond < 1e12)) {
    std::ostringstream os;
    os << "Fisher matrix is singular (condition number " << cond << ")";
    throw SingularFisher(os.str(), cond);
  }
  const RMat inv = dscale.asDiagonal() * es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                   es.eigenvectors().transpose() * dscale.asDiagonal();
  CrbResult r;
  r.condition_number = cond;
  for (size_t p = 0; p < theta.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(4 * p);
    r.delay.push_back(inv(i, i));
    r.doppler.push_back(inv(i + 1, i + 1));
  }
  return r;
}

namespace {

struct MleSearch {
  const SampleGrid& Y;
  const Layout& lay;
  const TxFrame& f;
  const FrameConfig& c;

  struct Column {
    std::vector<cd> a0, a1;  // conv values at both index sets
    double base_norm = 0.0;
  };

  Column conv(double tau) const {
    Column col;
    const Taps t = make_taps(tau, c.rc);
    col.a0.resize(lay.idx.size());
    for (size_t e = 0; e < lay.idx.size(); ++e) {
      col.a0[e] = conv_at(f.target_stream, lay.idx[e], t).first;
      col.base_norm += std::norm(col.a0[e]);
    }
    if (!lay.idx2.empty()) {
      col.a1.resize(lay.idx2.size());
      for (size_t e = 0; e < lay.idx2.size(); ++e) {
        col.a1[e] = conv_at(f.target_stream, lay.idx2[e], t).first;
        col.base_norm += std::norm(col.a1[e]);
      }
    }
    return col;
  }

  // (|<s, Y>|^2 / ||s||^2, <s, Y>, ||s||^2)
  std::tuple<double, cd, double> eval(const Column& col, double nu) const {
    const double w = -2.0 * kPi * nu / c.n_x();
    // phase of index I(0,m) + k factors into a per-column and a per-row term
    const int extra = lay.idx2.empty() ? 0 : c.n_cp;
    std::vector<cd> qk(static_cast<size_t>(lay.L + extra));
    for (size_t k = 0; k < qk.size(); ++k) qk[k] = std::polar(1.0, w * static_cast<double>(k));
    cd inner(0, 0);
    cd cross(0, 0);
    for (int m = 0; m < lay.Ms; ++m) {
      const size_t e0 = static_cast<size_t>(m * lay.L);
      const cd pm = std::polar(1.0, w * lay.idx[e0]);
      cd acc(0, 0), accx(0, 0);
      for (int k = 0; k < lay.L; ++k) {
        const size_t e = e0 + static_cast<size_t>(k);
        cd s = col.a0[e] * qk[static_cast<size_t>(k)];
        if (extra) {
          const cd s1 = col.a1[e] * qk[static_cast<size_t>(k + extra)];
          accx += std::conj(s) * s1;
          s += s1;
        }
        acc += std::conj(s) * Y.data(k, m);
      }
      inner += std::conj(pm) * acc;
      cross += accx;
    }
    const double norm = col.base_norm + 2.0 * cross.real();
    if (norm <= 0.0) return {0.0, inner, norm};
    return {std::norm(inner) / norm, inner, norm};
  }
};

}  // namespace

MleResult mle_grid_oracle(const SampleGrid& Y, FrameKind kind, const FrameConfig& config, double dd_grid_step,
                          const TxFrame* frame) {
  if (!(dd_grid_step > 0.0)) throw ConfigError("grid step must be positive");
  const FrameConfig c = config.with_kind(kind);
  TxFrame holder;
  const TxFrame& f = frame_or_reference(frame, c, holder);
  const Layout lay = layout(kind, c);
  MleSearch s{Y, lay, f, c};
  const double tmax = max_target_delay(c);
  const double half_r = c.slow_len() / 2.0;

  double best = -1.0, bt = 0.0, bn = 0.0;
  cd bi(0, 0);
  double bnorm = 1.0;
  auto sweep = [&](double t0, double t1, double n0, double n1, double step) {
    const int nt = static_cast<int>(std::floor((t1 - t0) / step + 1e-9));
    const int nn = static_cast<int>(std::floor((n1 - n0) / step + 1e-9));
    double lb = -1.0, lt = bt, ln = bn;
    cd li = bi;
    double lnorm = bnorm;
    for (int i = 0; i <= nt; ++i) {
      const double tau = t0 + i * step;
      const auto col = s.conv(tau);
      for (int j = 0; j <= nn; ++j) {
        const double nu = n0 + j * step;
        const auto [v, inner, norm] = s.eval(col, nu);
        if (v > lb) {
          lb = v;
          lt = tau;
          ln = nu;
          li = inner;
          lnorm = norm;
        }
      }
    }
    best = lb;
    bt = lt;
    bn = ln;
    bi = li;
    bnorm = lnorm;
  };
  sweep(0.0, tmax - 0.5, -half_r, half_r - 0.5, 0.5);
  sweep(bt - 0.5, bt + 0.5, bn - 0.5, bn + 0.5, 1.0 / 32.0);
  const double w = std::max(1.0 / 32.0, dd_grid_step);
  sweep(bt - w, bt + w, bn - w, bn + w, dd_grid_step);
  MleResult r;
  r.tau = bt;
  r.nu = bn;
  r.gain = bnorm > 0.0 ? bi / bnorm : cd(0, 0);
  return r;
}

}  // namespace uwisac
