// uwisac: Monte Carlo sweeps, bounds and range tables for the guard-interval frame family
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uwisac/harness.hpp"

using namespace uwisac;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--trials", c.trials, "Monte Carlo trials per SNR point")->check(CLI::PositiveNumber);
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", c.out, "output file (default stdout)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig default_config(const std::string& cmd) {
  ExperimentConfig cfg;
  if (cmd == "rmse") {
    cfg.snr_db = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    cfg.include_crb = true;
  } else if (cmd == "outlier") {
    cfg.targets = {TargetSpec{{4.417, 4.417}, {2.405, 2.405}, std::nullopt, 0.0}};
    cfg.snr_db = {10, 12, 14, 16, 18, 20, 22, 24, 26};
  } else if (cmd == "crb") {
    cfg.snr_db = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  }
  return cfg;
}

ExperimentConfig resolve(const std::string& cmd, const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? default_config(cmd) : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.trials) cfg.trials = *c.trials;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

void emit(const Common& c, const std::vector<ResultRow>& rows) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) throw ConfigError("cannot open output file '" + c.out + "'");
    os = &file;
  }
  if (c.format == "json")
    write_json(*os, rows);
  else
    write_csv(*os, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-Doppler estimation toolkit for OFDM, PS and unique-word frames"};
  app.require_subcommand(1);

  Common rmse_opts, outlier_opts, crb_opts, range_opts, info_opts;
  auto* rmse = app.add_subcommand("rmse", "RMSE sweep of the fine-grid and integer-grid estimators");
  add_common(rmse, rmse_opts);
  auto* outlier = app.add_subcommand("outlier", "simulated outlier frequency and its union bound");
  add_common(outlier, outlier_opts);
  auto* crbc = app.add_subcommand("crb", "square-root CRB per SNR and frame kind");
  add_common(crbc, crb_opts);
  auto* range = app.add_subcommand("range", "iso-range and Cassini range tables");
  add_common(range, range_opts);
  std::string contours;
  range->add_option("--contours", contours, "also write contour points as CSV to this file");
  auto* info = app.add_subcommand("info", "processing gain, rate loss, limits and complexity per frame kind");
  add_common(info, info_opts);
  double bandwidth = 122.88e6;
  info->add_option("--bandwidth", bandwidth, "sample rate in Hz")->check(CLI::PositiveNumber);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the resolved config to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rmse->parsed()) {
      const auto cfg = resolve("rmse", rmse_opts);
      if (print_config) std::cerr << dump_config(cfg) << '\n';
      emit(rmse_opts, run_rmse_sweep(cfg));
    } else if (outlier->parsed()) {
      const auto cfg = resolve("outlier", outlier_opts);
      if (print_config) std::cerr << dump_config(cfg) << '\n';
      emit(outlier_opts, run_outlier_sweep(cfg));
    } else if (crbc->parsed()) {
      const auto cfg = resolve("crb", crb_opts);
      if (print_config) std::cerr << dump_config(cfg) << '\n';
      emit(crb_opts, run_crb_report(cfg));
    } else if (range->parsed()) {
      const auto cfg = resolve("range", range_opts);
      if (print_config) std::cerr << dump_config(cfg) << '\n';
      emit(range_opts, run_range_analysis(cfg));
      if (!contours.empty()) {
        std::ofstream f(contours);
        if (!f) throw ConfigError("cannot open contour file '" + contours + "'");
        write_contours_csv(f, range_contours(cfg));
      }
    } else if (info->parsed()) {
      const auto cfg = resolve("info", info_opts);
      if (print_config) std::cerr << dump_config(cfg) << '\n';
      emit(info_opts, run_info(cfg, bandwidth));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
