#include "uwisac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "uwisac/chanest.hpp"
#include "uwisac/channel.hpp"
#include "uwisac/crb.hpp"
#include "uwisac/frames.hpp"
#include "uwisac/outlier.hpp"
#include "uwisac/rng.hpp"

namespace uwisac {

using nlohmann::json;

namespace {

constexpr double kNoise = 1.0;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Window parse_window(const json& j, const std::string& where) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    Window w{j[0].get<double>(), j[1].get<double>()};
    if (w.hi < w.lo) throw ConfigError(where + ": window upper bound below lower bound");
    return w;
  }
  throw ConfigError(where + ": expected a number or a [lo, hi] pair");
}

json window_json(const Window& w) {
  if (w.fixed()) return w.lo;
  return json::array({w.lo, w.hi});
}

double draw(const Window& w, Rng& rng) {
  if (w.fixed()) return w.lo;
  return std::uniform_real_distribution<double>(w.lo, w.hi)(rng);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::clamp(nt, 1, std::max(1, n));
  if (nt == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string suffix(int p, int P) { return P > 1 ? "[" + std::to_string(p) + "]" : std::string(); }

bool all_fixed(const ExperimentConfig& cfg) {
  for (const auto& t : cfg.targets)
    if (!t.tau.fixed() || !t.nu.fixed()) return false;
  return true;
}

// deterministic DD of the scene template (window centers)
std::vector<Target> center_targets(const ExperimentConfig& cfg, FrameKind kind, double snr_db) {
  const FrameConfig fc = cfg.frame.with_kind(kind);
  const double G = static_cast<double>(processing_gain(kind, fc));
  std::vector<Target> out;
  for (const auto& s : cfg.targets) {
    Target t;
    t.tau = s.tau.center();
    t.nu = s.nu.center();
    if (s.relative_to) {
      t.tau += out[static_cast<size_t>(*s.relative_to)].tau;
      t.nu += out[static_cast<size_t>(*s.relative_to)].nu;
    }
    t.gain_mag = std::sqrt(db_to_lin(snr_db + s.snr_offset_db) * kNoise / G);
    t.gain_phase = 0.0;
    out.push_back(t);
  }
  return out;
}

// best assignment of estimates to truths by total squared DD error
std::vector<int> associate(const std::vector<Target>& truth, const std::vector<DDEstimate>& est, int R) {
  const int P = static_cast<int>(truth.size());
  std::vector<int> perm(static_cast<size_t>(P));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int p = 0; p < P; ++p) {
      const auto& t = truth[static_cast<size_t>(p)];
      const auto& e = est[static_cast<size_t>(perm[static_cast<size_t>(p)])];
      const double dt = e.tau_hat - t.tau;
      const double dn = wrap_signed(e.nu_hat - t.nu, R);
      cost += dt * dt + dn * dn;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

int kind_rank(FrameKind k) { return static_cast<int>(k); }

}  // namespace

void ExperimentConfig::validate() const {
  frame.validate();
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (snr_db.empty()) throw ConfigError("SNR grid must be nonempty");
  if (kinds.empty()) throw ConfigError("at least one frame kind is required");
  if (targets.empty()) throw ConfigError("at least one target is required");
  if (targets.size() > 6) throw ConfigError("at most 6 targets are supported");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and non-negative");
  for (double s : snr_db)
    if (!std::isfinite(s)) throw ConfigError("SNR grid entries must be finite");
  for (size_t p = 0; p < targets.size(); ++p) {
    const auto& r = targets[p].relative_to;
    if (r && (*r < 0 || static_cast<size_t>(*r) >= p))
      throw ConfigError("relative_to must reference an earlier target");
  }
  if (beta > 0.0 && !los) throw ConfigError("beta > 0 requires a LoS path");
  if (los && beta > 0.0)
    for (FrameKind k : kinds)
      if (k == FrameKind::ofdm) throw ConfigError("LoS interference removal is not supported for OFDM frames");
  EstimatorConfig e = estimator;
  e.n_targets = static_cast<int>(targets.size());
  e.validate();
  if (range.contour_points < 8) throw ConfigError("contour_points must be at least 8");
  for (const auto& p : range.presets) budget_preset(p);
}

SystemBudget budget_preset(const std::string& name) {
  if (name == "outdoor") return outdoor_budget();
  if (name == "indoor") return indoor_budget();
  throw ConfigError("unknown budget preset '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, {"frame", "kinds", "targets", "los", "beta", "snr_db", "trials", "estimator", "seed", "threads",
                 "include_crb", "range"},
             "config");
  ExperimentConfig cfg;
  if (j.contains("frame")) {
    const json& f = j["frame"];
    check_keys(f, {"preset", "k", "n_cp", "m", "m_p", "qam_order", "alpha", "half_span"}, "frame");
    if (f.contains("preset")) {
      const auto name = get_as<std::string>(f["preset"], "frame.preset");
      if (name == "link") cfg.frame = link_config();
      else if (name == "system") cfg.frame = system_config();
      else throw ConfigError("frame.preset: unknown preset '" + name + "'");
    }
    if (f.contains("k")) cfg.frame.K = get_as<int>(f["k"], "frame.k");
    if (f.contains("n_cp")) cfg.frame.n_cp = get_as<int>(f["n_cp"], "frame.n_cp");
    if (f.contains("m")) cfg.frame.M = get_as<int>(f["m"], "frame.m");
    if (f.contains("m_p")) cfg.frame.M_p = get_as<int>(f["m_p"], "frame.m_p");
    if (f.contains("qam_order")) cfg.frame.qam_order = get_as<int>(f["qam_order"], "frame.qam_order");
    if (f.contains("alpha")) cfg.frame.rc.alpha = get_as<double>(f["alpha"], "frame.alpha");
    if (f.contains("half_span")) cfg.frame.rc.half_span = get_as<int>(f["half_span"], "frame.half_span");
  }
  if (j.contains("kinds")) {
    cfg.kinds.clear();
    for (const auto& k : j["kinds"]) {
      try {
        cfg.kinds.push_back(parse_kind(get_as<std::string>(k, "kinds")));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("kinds: ") + e.what());
      }
    }
  }
  if (j.contains("targets")) {
    if (!j["targets"].is_array()) throw ConfigError("targets: expected an array");
    cfg.targets.clear();
    for (const auto& t : j["targets"]) {
      check_keys(t, {"tau", "nu", "relative_to", "snr_offset_db"}, "targets[]");
      TargetSpec s;
      if (t.contains("tau")) s.tau = parse_window(t["tau"], "targets[].tau");
      if (t.contains("nu")) s.nu = parse_window(t["nu"], "targets[].nu");
      if (t.contains("relative_to") && !t["relative_to"].is_null())
        s.relative_to = get_as<int>(t["relative_to"], "targets[].relative_to");
      if (t.contains("snr_offset_db")) s.snr_offset_db = get_as<double>(t["snr_offset_db"], "targets[].snr_offset_db");
      cfg.targets.push_back(s);
    }
  }
  if (j.contains("los") && !j["los"].is_null()) {
    const json& l = j["los"];
    check_keys(l, {"tau", "nu", "snr_db"}, "los");
    LosSpec s;
    if (l.contains("tau")) s.tau = parse_window(l["tau"], "los.tau");
    if (l.contains("nu")) s.nu = parse_window(l["nu"], "los.nu");
    if (l.contains("snr_db")) s.snr_db = get_as<double>(l["snr_db"], "los.snr_db");
    cfg.los = s;
  }
  if (j.contains("beta")) cfg.beta = get_as<double>(j["beta"], "beta");
  if (j.contains("snr_db")) {
    const json& s = j["snr_db"];
    cfg.snr_db.clear();
    if (s.is_array()) {
      for (const auto& v : s) cfg.snr_db.push_back(get_as<double>(v, "snr_db"));
    } else {
      check_keys(s, {"start", "stop", "step"}, "snr_db");
      if (!s.contains("start") || !s.contains("stop") || !s.contains("step"))
        throw ConfigError("snr_db: range needs start, stop and step");
      const double a = get_as<double>(s["start"], "snr_db.start");
      const double b = get_as<double>(s["stop"], "snr_db.stop");
      const double st = get_as<double>(s["step"], "snr_db.step");
      if (!(st > 0.0) || b < a) throw ConfigError("snr_db: need step > 0 and stop >= start");
      const int n = static_cast<int>(std::floor((b - a) / st + 1e-9));
      for (int i = 0; i <= n; ++i) cfg.snr_db.push_back(a + i * st);
    }
  }
  if (j.contains("trials")) cfg.trials = get_as<int>(j["trials"], "trials");
  if (j.contains("estimator")) {
    const json& e = j["estimator"];
    check_keys(e, {"n_grid", "n_iterations"}, "estimator");
    if (e.contains("n_grid")) cfg.estimator.n_grid = get_as<int>(e["n_grid"], "estimator.n_grid");
    if (e.contains("n_iterations")) cfg.estimator.n_iterations = get_as<int>(e["n_iterations"], "estimator.n_iterations");
  }
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("threads")) cfg.threads = get_as<int>(j["threads"], "threads");
  if (j.contains("include_crb")) cfg.include_crb = get_as<bool>(j["include_crb"], "include_crb");
  if (j.contains("range")) {
    const json& r = j["range"];
    check_keys(r, {"presets", "waterfall_snr_db", "angles_deg", "contour_points"}, "range");
    if (r.contains("presets")) cfg.range.presets = get_as<std::vector<std::string>>(r["presets"], "range.presets");
    if (r.contains("waterfall_snr_db")) {
      const json& w = r["waterfall_snr_db"];
      if (!w.is_object()) throw ConfigError("range.waterfall_snr_db: expected an object");
      for (auto it = w.begin(); it != w.end(); ++it) {
        FrameKind k;
        try {
          k = parse_kind(it.key());
        } catch (const std::invalid_argument&) {
          throw ConfigError("range.waterfall_snr_db: unknown key '" + it.key() + "'");
        }
        cfg.range.waterfall_snr_db[k] = get_as<double>(it.value(), "range.waterfall_snr_db");
      }
    }
    if (r.contains("angles_deg")) cfg.range.angles_deg = get_as<std::vector<double>>(r["angles_deg"], "range.angles_deg");
    if (r.contains("contour_points")) cfg.range.contour_points = get_as<int>(r["contour_points"], "range.contour_points");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  json j;
  j["frame"] = {{"k", cfg.frame.K},         {"n_cp", cfg.frame.n_cp},       {"m", cfg.frame.M},
                {"m_p", cfg.frame.M_p},     {"qam_order", cfg.frame.qam_order}, {"alpha", cfg.frame.rc.alpha},
                {"half_span", cfg.frame.rc.half_span}};
  j["kinds"] = json::array();
  for (FrameKind k : cfg.kinds) j["kinds"].push_back(std::string(to_string(k)));
  j["targets"] = json::array();
  for (const auto& t : cfg.targets) {
    json o{{"tau", window_json(t.tau)}, {"nu", window_json(t.nu)}, {"snr_offset_db", t.snr_offset_db}};
    o["relative_to"] = t.relative_to ? json(*t.relative_to) : json(nullptr);
    j["targets"].push_back(o);
  }
  if (cfg.los)
    j["los"] = {{"tau", window_json(cfg.los->tau)}, {"nu", window_json(cfg.los->nu)}, {"snr_db", cfg.los->snr_db}};
  else
    j["los"] = nullptr;
  j["beta"] = cfg.beta;
  j["snr_db"] = cfg.snr_db;
  j["trials"] = cfg.trials;
  j["estimator"] = {{"n_grid", cfg.estimator.n_grid}, {"n_iterations", cfg.estimator.n_iterations}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["include_crb"] = cfg.include_crb;
  json w = json::object();
  for (const auto& [k, v] : cfg.range.waterfall_snr_db) w[std::string(to_string(k))] = v;
  j["range"] = {{"presets", cfg.range.presets},
                {"waterfall_snr_db", w},
                {"angles_deg", cfg.range.angles_deg},
                {"contour_points", cfg.range.contour_points}};
  return j.dump(2);
}

SceneDraw draw_scene(const ExperimentConfig& cfg, FrameKind kind, double snr_db, Rng& rng) {
  const FrameConfig fc = cfg.frame.with_kind(kind);
  const double G = static_cast<double>(processing_gain(kind, fc));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  SceneDraw d;
  for (const auto& s : cfg.targets) {
    Target t;
    t.tau = draw(s.tau, rng);
    t.nu = draw(s.nu, rng);
    if (s.relative_to) {
      t.tau += d.targets[static_cast<size_t>(*s.relative_to)].tau;
      t.nu += d.targets[static_cast<size_t>(*s.relative_to)].nu;
    }
    t.gain_phase = phase(rng);
    t.gain_mag = std::sqrt(db_to_lin(snr_db + s.snr_offset_db) * kNoise / G);
    d.targets.push_back(t);
  }
  if (cfg.los) {
    d.los.tau = draw(cfg.los->tau, rng);
    d.los.nu = draw(cfg.los->nu, rng);
    d.los.gain_phase = phase(rng);
    d.los.gain_mag = std::sqrt(db_to_lin(cfg.los->snr_db) * kNoise / G);
  }
  return d;
}

namespace {

struct TrialErrors {
  std::vector<double> sq;  // squared errors, one slot per metric
};

std::vector<std::string> rmse_metrics(const ExperimentConfig& cfg) {
  const int P = static_cast<int>(cfg.targets.size());
  std::vector<std::string> names;
  for (int p = 0; p < P; ++p) {
    names.push_back("rmse_delay" + suffix(p, P));
    names.push_back("rmse_doppler" + suffix(p, P));
    if (cfg.los) {
      names.push_back("rmse_delay_offset" + suffix(p, P));
      names.push_back("rmse_doppler_offset" + suffix(p, P));
    }
  }
  if (P == 1 && !cfg.los) {
    names.push_back("rmse_delay_integer");
    names.push_back("rmse_doppler_integer");
  }
  return names;
}

TrialErrors rmse_trial(const ExperimentConfig& cfg, FrameKind kind, double snr_db, int trial) {
  const FrameConfig fc = cfg.frame.with_kind(kind);
  const int P = static_cast<int>(cfg.targets.size());
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
  const SceneDraw sd = draw_scene(cfg, kind, snr_db, rng);
  const TxFrame frame = build_frame(fc, rng);
  Scene scene;
  scene.targets = sd.targets;
  scene.noise_power = kNoise;
  if (cfg.los) {
    scene.los = sd.los;
    scene.beta = cfg.beta;
  }
  SimOptions opts;
  opts.los_stream = cfg.los.has_value();
  const RxStreams rx = simulate_rx(frame, scene, fc, rng, opts);
  const ChannelEstimate H = estimate_channel(sample_grid(rx.target, kind, fc), frame, fc, Stream::target);
  const int R = static_cast<int>(H.data.rows());

  EstimatorConfig est = cfg.estimator;
  est.n_targets = P;
  if (P == 1) est.n_iterations = 1;

  TrialErrors out;
  std::vector<DDEstimate> estimates;
  DDEstimate los_est;
  if (!cfg.los && P == 1) {
    const GridPeak pk = integer_grid_estimate(H, fc);
    const RefineResult r = fine_grid_refine(H, fc, pk, est);
    DDEstimate e;
    e.tau_hat = r.tau_hat;
    e.nu_hat = r.nu_hat;
    estimates.push_back(e);
    const auto& t = sd.targets[0];
    const double dt = r.tau_hat - t.tau;
    const double dn = wrap_signed(r.nu_hat - t.nu, R);
    const double it = pk.k - t.tau;
    const double in = wrap_signed(H.signed_row(pk.m) - t.nu, R);
    out.sq = {dt * dt, dn * dn, it * it, in * in};
    return out;
  }
  if (cfg.los) {
    const ChannelEstimate Hl = estimate_channel(sample_grid(rx.los, kind, fc), frame, fc, Stream::los);
    if (kind == FrameKind::ofdm) {
      // no leakage to remove; the LoS branch only provides the reference DD
      const GridPeak pk = integer_grid_estimate(Hl, fc);
      const RefineResult r = fine_grid_refine(Hl, fc, pk, est);
      los_est.tau_hat = r.tau_hat;
      los_est.nu_hat = r.nu_hat;
      estimates = multi_target_estimate(H, nullptr, fc, est).targets;
      for (auto& e : estimates) {
        e.tau_offset = e.tau_hat - los_est.tau_hat;
        e.nu_offset = wrap_signed(e.nu_hat - los_est.nu_hat, R);
      }
    } else {
      const MultiTargetResult mt = multi_target_estimate(H, &Hl, fc, est);
      estimates = mt.targets;
      los_est = mt.los;
    }
  } else {
    estimates = multi_target_estimate(H, nullptr, fc, est).targets;
  }
  const std::vector<int> perm = associate(sd.targets, estimates, R);
  for (int p = 0; p < P; ++p) {
    const auto& t = sd.targets[static_cast<size_t>(p)];
    const auto& e = estimates[static_cast<size_t>(perm[static_cast<size_t>(p)])];
    const double dt = e.tau_hat - t.tau;
    const double dn = wrap_signed(e.nu_hat - t.nu, R);
    out.sq.push_back(dt * dt);
    out.sq.push_back(dn * dn);
    if (cfg.los) {
      const double ot = e.tau_offset - (t.tau - sd.los.tau);
      const double on = wrap_signed(e.nu_offset - (t.nu - sd.los.nu), R);
      out.sq.push_back(ot * ot);
      out.sq.push_back(on * on);
    }
  }
  return out;
}

void append_crb_rows(const ExperimentConfig& cfg, FrameKind kind, double snr_db, std::vector<ResultRow>& rows) {
  const FrameConfig fc = cfg.frame.with_kind(kind);
  const ParamVector theta = center_targets(cfg, kind, snr_db);
  const int P = static_cast<int>(theta.size());
  try {
    const CrbResult c = crb(theta, kind, fc, kNoise);
    for (int p = 0; p < P; ++p) {
      rows.push_back({kind, snr_db, "crb_delay" + suffix(p, P), std::sqrt(c.delay[static_cast<size_t>(p)]), 0, cfg.seed});
      rows.push_back(
          {kind, snr_db, "crb_doppler" + suffix(p, P), std::sqrt(c.doppler[static_cast<size_t>(p)]), 0, cfg.seed});
    }
  } catch (const SingularFisher& e) {
    const double cond = std::isfinite(e.condition_number) ? e.condition_number : std::numeric_limits<double>::max();
    rows.push_back({kind, snr_db, "crb_singular", cond, 0, cfg.seed});
  }
}

}  // namespace

std::vector<ResultRow> run_rmse_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<std::string> names = rmse_metrics(cfg);
  std::vector<ResultRow> rows;
  for (FrameKind kind : cfg.kinds) {
    for (double snr : cfg.snr_db) {
      std::vector<TrialErrors> res(static_cast<size_t>(cfg.trials));
      parallel_for(cfg.trials, cfg.threads,
                   [&](int i) { res[static_cast<size_t>(i)] = rmse_trial(cfg, kind, snr, i); });
      std::vector<double> acc(names.size(), 0.0);
      for (const auto& r : res)
        for (size_t m = 0; m < names.size(); ++m) acc[m] += r.sq[m];
      for (size_t m = 0; m < names.size(); ++m)
        rows.push_back({kind, snr, names[m], std::sqrt(acc[m] / cfg.trials), cfg.trials, cfg.seed});
      if (cfg.include_crb && all_fixed(cfg)) append_crb_rows(cfg, kind, snr, rows);
    }
  }
  sort_rows(rows);
  return rows;
}

std::vector<ResultRow> run_outlier_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.targets.size() != 1) throw ConfigError("the outlier sweep needs a single target");
  if (cfg.targets[0].relative_to) throw ConfigError("the outlier sweep target cannot be relative");
  ExperimentConfig c = cfg;
  // perfect LoS removal: the scene carries the target only
  c.los.reset();
  c.beta = 0.0;
  const TargetSpec& ts = c.targets[0];
  std::vector<ResultRow> rows;
  for (FrameKind kind : c.kinds) {
    const FrameConfig fc = c.frame.with_kind(kind);
    for (double snr : c.snr_db) {
      const bool fixed_dd = ts.tau.fixed() && ts.nu.fixed();
      std::vector<std::array<int, 4>> hits(static_cast<size_t>(c.trials));
      std::vector<OutlierBound> ubs(fixed_dd ? 1 : static_cast<size_t>(c.trials));
      if (fixed_dd) ubs[0] = outlier_ub(kind, fc, center_targets(c, kind, snr)[0], kNoise);
      parallel_for(c.trials, c.threads, [&](int i) {
        Rng rng(derive_seed(c.seed, static_cast<std::uint64_t>(i)));
        const SceneDraw sd = draw_scene(c, kind, snr, rng);
        const TxFrame frame = build_frame(fc, rng);
        Scene scene;
        scene.targets = sd.targets;
        scene.noise_power = kNoise;
        const RxStreams rx = simulate_rx(frame, scene, fc, rng, SimOptions{false});
        const ChannelEstimate H = estimate_channel(sample_grid(rx.target, kind, fc), frame, fc);
        const GridPeak pk = integer_grid_estimate(H, fc);
        const auto& t = sd.targets[0];
        const int R = static_cast<int>(H.data.rows());
        const int L = static_cast<int>(H.data.cols());
        const long long k0 = round_half_away(t.tau);
        const int m0 = wrap_index(round_half_away(t.nu), R);
        const int dk = std::abs(static_cast<int>(wrap_signed(static_cast<double>(pk.k - k0), L)));
        const int dm = std::abs(static_cast<int>(wrap_signed(static_cast<double>(pk.m - m0), R)));
        hits[static_cast<size_t>(i)] = {dk != 0, dm != 0, dk > 1, dm > 1};
        // random DD: the bound is averaged over the same draws as the simulation
        if (!fixed_dd) ubs[static_cast<size_t>(i)] = outlier_ub(kind, fc, t, kNoise);
      });
      std::array<long long, 4> n{};
      for (const auto& h : hits)
        for (size_t q = 0; q < 4; ++q) n[q] += h[q];
      const char* names[] = {"outlier_delay", "outlier_doppler", "outlier_delay_far", "outlier_doppler_far"};
      for (size_t q = 0; q < 4; ++q)
        rows.push_back({kind, snr, names[q], static_cast<double>(n[q]) / c.trials, c.trials, c.seed});
      double ud = 0.0, um = 0.0;
      for (const auto& u : ubs) {
        ud += u.delay;
        um += u.doppler;
      }
      const long long ub_trials = fixed_dd ? 0 : c.trials;
      rows.push_back({kind, snr, "ub_delay", ud / ubs.size(), ub_trials, c.seed});
      rows.push_back({kind, snr, "ub_doppler", um / ubs.size(), ub_trials, c.seed});
    }
  }
  sort_rows(rows);
  return rows;
}

std::vector<ResultRow> run_crb_report(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (FrameKind kind : cfg.kinds)
    for (double snr : cfg.snr_db) append_crb_rows(cfg, kind, snr, rows);
  sort_rows(rows);
  return rows;
}

namespace {

struct RangeCurves {
  Contour iso;
  Contour cassini;
  double b2 = 0.0;
};

RangeCurves range_curves(const ExperimentConfig& cfg, const SystemBudget& b, FrameKind kind) {
  const FrameConfig fc = system_config(kind);
  const auto it = cfg.range.waterfall_snr_db.find(kind);
  if (it == cfg.range.waterfall_snr_db.end())
    throw ConfigError("no waterfall SNR for kind " + std::string(to_string(kind)));
  const double G = static_cast<double>(processing_gain(kind, fc));
  RangeCurves rc;
  rc.iso = iso_range_contour(max_unambiguous(kind, fc, b.bandwidth).tau_max, b.d_br, cfg.range.contour_points);
  const CassiniOval ov = cassini_oval(db_to_lin(it->second), G, b, b.noise_power(), cfg.range.contour_points);
  rc.cassini = ov.contour;
  rc.b2 = ov.b2;
  return rc;
}

std::string angle_tag(double deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05.1f", deg);
  return buf;
}

}  // namespace

std::vector<ResultRow> run_range_analysis(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> angles = cfg.range.angles_deg;
  if (angles.empty())
    for (int a = 0; a <= 180; a += 15) angles.push_back(a);
  std::vector<ResultRow> rows;
  for (const auto& preset : cfg.range.presets) {
    const SystemBudget b = budget_preset(preset);
    for (FrameKind kind : cfg.kinds) {
      const RangeCurves rc = range_curves(cfg, b, kind);
      const double snr = cfg.range.waterfall_snr_db.at(kind);
      rows.push_back({kind, snr, preset + ".cassini_b2", rc.b2, 0, cfg.seed});
      for (double a : angles) {
        if (auto d = range_at_angle(rc.iso, b.d_br, a))
          rows.push_back({kind, snr, preset + ".iso_range." + angle_tag(a), *d, 0, cfg.seed});
        if (auto d = range_at_angle(rc.cassini, b.d_br, a))
          rows.push_back({kind, snr, preset + ".cassini." + angle_tag(a), *d, 0, cfg.seed});
      }
      // achievable range along each bearing is the smaller of the two limits
      double max_range = 0.0;
      bool encloses = true;
      for (int i = 0; i <= 720; ++i) {
        const double a = 360.0 * i / 720;
        const auto di = range_at_angle(rc.iso, b.d_br, a);
        const auto dc = range_at_angle(rc.cassini, b.d_br, a);
        if (!di || !dc || *dc <= *di) encloses = false;
        if (di && dc) max_range = std::max(max_range, std::min(*di, *dc));
      }
      rows.push_back({kind, snr, preset + ".max_range", max_range, 0, cfg.seed});
      rows.push_back({kind, snr, preset + ".cassini_encloses_iso", encloses ? 1.0 : 0.0, 0, cfg.seed});
    }
  }
  sort_rows(rows);
  return rows;
}

std::vector<ContourTable> range_contours(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ContourTable> out;
  for (const auto& preset : cfg.range.presets) {
    const SystemBudget b = budget_preset(preset);
    for (FrameKind kind : cfg.kinds) {
      RangeCurves rc = range_curves(cfg, b, kind);
      out.push_back({preset, kind, "iso_range", std::move(rc.iso)});
      out.push_back({preset, kind, "cassini", std::move(rc.cassini)});
    }
  }
  return out;
}

void write_contours_csv(std::ostream& os, const std::vector<ContourTable>& tables) {
  os << "preset,kind,curve,loop,x,y\n";
  for (const auto& t : tables)
    for (size_t l = 0; l < t.contour.loops.size(); ++l)
      for (const auto& p : t.contour.loops[l])
        os << t.preset << ',' << to_string(t.kind) << ',' << t.curve << ',' << l << ',' << fmt9(p.x) << ','
           << fmt9(p.y) << '\n';
}

std::vector<ResultRow> run_info(const ExperimentConfig& cfg, double bandwidth) {
  cfg.validate();
  std::vector<ResultRow> rows;
  EstimatorConfig est = cfg.estimator;
  est.n_targets = static_cast<int>(cfg.targets.size());
  const long long nfg = fine_grid_count(est.n_iterations, est.n_targets, est.n_grid);
  for (FrameKind kind : cfg.kinds) {
    const FrameConfig fc = cfg.frame.with_kind(kind);
    const MaxDD mx = max_unambiguous(kind, fc, bandwidth);
    const Resolution res = resolution(fc, bandwidth);
    double loss_db = 0.0;
    if (kind == FrameKind::ofdm) loss_db = lin_to_db(l_ofdm(fc.qam_order));
    if (kind == FrameKind::uw1) loss_db = lin_to_db(2.0);
    auto add = [&](const std::string& m, double v) { rows.push_back({kind, 0.0, m, v, 0, cfg.seed}); };
    add("processing_gain", static_cast<double>(processing_gain(kind, fc)));
    add("data_rate_loss", data_rate_loss(kind, fc.M, fc.M_p));
    add("snr_loss_db", loss_db);
    add("max_delay_s", mx.tau_max);
    add("max_doppler_hz", mx.nu_max);
    add("delay_resolution_s", res.delta_tau);
    add("doppler_resolution_hz", res.delta_nu);
    add("complexity", receiver_complexity(kind, fc, nfg));
  }
  sort_rows(rows);
  return rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.kind != b.kind) return kind_rank(a.kind) < kind_rank(b.kind);
    if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
    return a.metric < b.metric;
  });
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "kind,snr_db,metric,value,trials,seed\n";
  for (const auto& r : rows)
    os << to_string(r.kind) << ',' << fmt9(r.snr_db) << ',' << r.metric << ',' << fmt9(r.value) << ',' << r.trials
       << ',' << r.seed << '\n';
}

void write_json(std::ostream& os, const std::vector<ResultRow>& rows) {
  // numbers go through the same 9-digit formatting as the CSV writer
  os << "[\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << "  {\"kind\": \"" << to_string(r.kind) << "\", \"snr_db\": " << fmt9(r.snr_db) << ", \"metric\": "
       << json(r.metric).dump() << ", \"value\": " << fmt9(r.value) << ", \"trials\": " << r.trials
       << ", \"seed\": " << r.seed << "}" << (i + 1 < rows.size() ? "," : "") << '\n';
  }
  os << "]\n";
}

std::optional<double> row_value(const std::vector<ResultRow>& rows, FrameKind kind, double snr_db,
                                const std::string& metric) {
  for (const auto& r : rows)
    if (r.kind == kind && r.metric == metric && std::abs(r.snr_db - snr_db) < 1e-9) return r.value;
  return std::nullopt;
}

std::optional<double> crossing_snr(const std::vector<ResultRow>& rows, FrameKind kind, const std::string& metric,
                                   double level) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.kind == kind && r.metric == metric) pts.emplace_back(r.snr_db, r.value);
  std::sort(pts.begin(), pts.end());
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto [s0, v0] = pts[i];
    const auto [s1, v1] = pts[i + 1];
    if (v0 > level && v1 <= level) {
      if (v1 <= 0.0) return s1;
      const double f = std::log(v0 / level) / std::log(v0 / v1);
      return s0 + f * (s1 - s0);
    }
  }
  if (!pts.empty() && pts.front().second <= level) return pts.front().first;
  return std::nullopt;
}

}  // namespace uwisac
