#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdamimo/anm.hpp"
#include "fdamimo/emit.hpp"
#include "fdamimo/scenario.hpp"

namespace fdamimo {

/// Worker count: FDAMIMO_THREADS if set (>= 1), else hardware concurrency.
int worker_count();

/// Default ANM τ: expected noise energy L (σ0² MN + Σ tr(C_t + C_r)).
double default_tau(const Scenario& scn, const std::vector<Target>& targets, const OffsetModel& offsets,
                   double snr_db);

/// Runs one named estimator on a stack. `n_targets` is the source count; row
/// MUSIC uses the number of distinct DOAs instead.
std::vector<Estimate> run_estimator(const Scenario& scn, const std::string& name, const CMatrix& stack,
                                    const GridSpec& grid, double tau);

/// Squared errors of estimates against the true targets after the
/// assignment minimising the normalised total error. Angle in deg², range in
/// m² (NaN for angle-only estimates).
struct MatchedError {
  double theta_deg2 = 0.0;
  double r_m2 = 0.0;
};
std::vector<MatchedError> match_targets(const RadarConfig& cfg, const std::vector<Target>& truth,
                                        const std::vector<Estimate>& est);

struct RmseRow {
  double sweep_value = 0.0;
  std::string estimator;
  double rmse_r = 0.0;          // m
  double rmse_theta = 0.0;      // deg
  int n_trials = 0;             // successful trials
  int n_failed = 0;
};

struct RmseTable {
  std::string sweep_axis = "none";
  std::vector<RmseRow> rows;
  Table to_table() const;
};

/// Monte-Carlo RMSE over trials (and sweep values). Trial t draws its pulses
/// from seed stream t of the scenario seed, for every sweep value.
RmseTable monte_carlo(const Scenario& scn, std::optional<int> trial_count = std::nullopt);

/// Equalised SNR tables at r = 0.4 r_max for the transmit or receive offset.
struct EqSnrTableOptions {
  std::vector<double> sigma_over_df{0.02, 0.04, 0.06, 0.08, 0.1};
  std::vector<double> delta_f{1e3, 10e3};
  double r_over_rmax = 0.4;
  int n_pulses = 1000;
  std::uint64_t seed = 0;
};
Table reproduce_eqsnr_table(OffsetScenario kind, const EqSnrTableOptions& opt = {});

enum class Curve { kApproxError, kEqSnrVsSigma, kEqSnrVsRange, kRmseVsSigmaT, kRmseVsSigmaR, kRmseVsSnr };
std::string to_string(Curve c);
Curve curve_from_string(const std::string& s);
const std::vector<Curve>& all_curves();

struct CurveOptions {
  int n_trials = 200;
  int anm_trials = 50;
  int n_pulses = 200;            // pulses per trial for RMSE curves
  int eqsnr_pulses = 1000;
  int approx_pulses = 200;
  double quad_tol = 1e-8;
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> sigma_over_df;
  std::vector<std::string> estimators{"music2d", "music_rows", "music_c4", "omp", "omp_anm"};
  GridConfig grid;
};

struct CurveResult {
  std::string name;
  Table table;
  std::vector<LineChart> charts;
  Json provenance;
};

CurveResult reproduce_curve(Curve which, const CurveOptions& opt = {});

/// Writes `<name>-<stamp>.csv`, one SVG per chart and `<name>-<stamp>.json`
/// (provenance); returns the written paths.
std::vector<std::string> write_curve(const CurveResult& res, const std::string& out_dir, const std::string& stamp);

}  // namespace fdamimo
