#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "uwisac/budget_geometry.hpp"
#include "uwisac/ddest.hpp"
#include "uwisac/types.hpp"

namespace uwisac {

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  bool fixed() const { return lo == hi; }
  double center() const { return 0.5 * (lo + hi); }
};

struct TargetSpec {
  Window tau{4.249, 4.249};
  Window nu{2.237, 2.237};
  // when set, tau and nu are offsets drawn around that target's realized DD
  std::optional<int> relative_to;
  double snr_offset_db = 0.0;
};

struct LosSpec {
  Window tau{0.0, 0.5};
  Window nu{0.0, 0.1};
  double snr_db = 50.0;
};

struct RangeSpec {
  std::vector<std::string> presets{"outdoor", "indoor"};
  std::map<FrameKind, double> waterfall_snr_db{
      {FrameKind::ofdm, 22.36}, {FrameKind::ps, 17.0}, {FrameKind::uw1, 20.0}, {FrameKind::uw2, 17.0}};
  std::vector<double> angles_deg;
  int contour_points = 3600;
};

struct ExperimentConfig {
  FrameConfig frame = link_config();
  std::vector<FrameKind> kinds{kAllKinds.begin(), kAllKinds.end()};
  std::vector<TargetSpec> targets{TargetSpec{}};
  std::optional<LosSpec> los;
  double beta = 0.0;
  std::vector<double> snr_db{30.0, 35.0, 40.0};
  int trials = 1000;
  EstimatorConfig estimator{};
  std::uint64_t seed = 1;
  int threads = 0;
  bool include_crb = false;
  RangeSpec range{};

  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg);

struct ResultRow {
  FrameKind kind = FrameKind::uw2;
  double snr_db = 0.0;
  std::string metric;
  double value = 0.0;
  long long trials = 0;
  std::uint64_t seed = 0;
};

// one trial of a scene draw: per-target DD truth and the kind-specific gain scale
struct SceneDraw {
  std::vector<Target> targets;
  Target los{0.0, 0.0, 0.0, 0.0};
};
SceneDraw draw_scene(const ExperimentConfig& cfg, FrameKind kind, double snr_db, Rng& rng);

std::vector<ResultRow> run_rmse_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> run_outlier_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> run_crb_report(const ExperimentConfig& cfg);
std::vector<ResultRow> run_range_analysis(const ExperimentConfig& cfg);
std::vector<ResultRow> run_info(const ExperimentConfig& cfg, double bandwidth);

struct ContourTable {
  std::string preset;
  FrameKind kind = FrameKind::uw2;
  std::string curve;  // iso_range | cassini
  Contour contour;
};
std::vector<ContourTable> range_contours(const ExperimentConfig& cfg);
void write_contours_csv(std::ostream& os, const std::vector<ContourTable>& tables);

// rows ordered by (kind, snr, metric)
void sort_rows(std::vector<ResultRow>& rows);
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_json(std::ostream& os, const std::vector<ResultRow>& rows);

// waterfall: SNR where a decreasing metric curve first drops to the level (log-linear interpolation)
std::optional<double> crossing_snr(const std::vector<ResultRow>& rows, FrameKind kind, const std::string& metric,
                                   double level);
std::optional<double> row_value(const std::vector<ResultRow>& rows, FrameKind kind, double snr_db,
                                const std::string& metric);

SystemBudget budget_preset(const std::string& name);

}  // namespace uwisac
