#include "fdamimo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numeric>
#include <thread>

#include "fdamimo/rng.hpp"

namespace fdamimo {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, n) on up to worker_count() threads.
template <typename F>
void parallel_for(int n, F body) {
  const int workers = std::min(worker_count(), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

int distinct_doas(const std::vector<Target>& targets) {
  std::vector<double> th;
  for (const auto& t : targets)
    if (std::none_of(th.begin(), th.end(), [&](double x) { return std::abs(x - t.theta) < 1e-12; }))
      th.push_back(t.theta);
  return static_cast<int>(th.size());
}

bool uses_anm(const std::string& name) { return name == "omp_anm" || name == "anm_music"; }

std::vector<double> ratio_axis(double lo, double hi, double step) {
  std::vector<double> v;
  for (int k = 0; lo + k * step <= hi + 1e-12; ++k) v.push_back(std::round((lo + k * step) * 1e9) / 1e9);
  return v;
}

Json curve_options_json(const CurveOptions& o) {
  return {{"n_trials", o.n_trials},       {"anm_trials", o.anm_trials},   {"n_pulses", o.n_pulses},
          {"eqsnr_pulses", o.eqsnr_pulses}, {"approx_pulses", o.approx_pulses}, {"quad_tol", o.quad_tol},
          {"seed", o.seed},               {"estimators", o.estimators}};
}

}  // namespace

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("FDAMIMO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

double default_tau(const Scenario& scn, const std::vector<Target>& targets, const OffsetModel& offsets,
                   double snr_db) {
  const double var0 = white_noise_variance(scn.radar, targets, snr_db);
  double energy = var0 * scn.radar.mn();
  for (const auto& t : targets) {
    const CovarianceModel cov = covariance_model(scn.radar, t, offsets, 0.0);
    energy += cov.ct.trace().real() + cov.cr.trace().real();
  }
  return energy * scn.n_pulses;
}

std::vector<Estimate> run_estimator(const Scenario& scn, const std::string& name, const CMatrix& stack,
                                    const GridSpec& grid, double tau) {
  const int S = static_cast<int>(scn.targets.size());
  if (name == "music2d") return music_2d(scn.radar, stack, grid, S).estimates;
  if (name == "music_rows") return music_rows(scn.radar, stack, grid.theta, distinct_doas(scn.targets)).estimates;
  if (name == "music_c4") return music_cumulant(scn.radar, build_c4(stack), grid, S).estimates;
  if (name == "omp") return omp(scn.radar, stack, grid, S).estimates;
  if (name == "omp_anm" || name == "anm_music") {
    if (!(tau > 0.0)) tau = 1e-9 * stack.squaredNorm();
    const DenoisedStack d = anm_denoise(scn.radar, stack, tau);
    std::vector<Estimate> est = name == "omp_anm" ? omp(scn.radar, d.x_hat, grid, S).estimates
                                                  : subspace_from_denoised(scn.radar, d, grid, S).estimates;
    for (auto& e : est) {
      e.method = name;
      e.diagnostics["anm_converged"] = d.converged ? 1.0 : 0.0;
      e.diagnostics["anm_iterations"] = d.iterations;
      e.diagnostics["anm_min_eigenvalue"] = d.min_eigenvalue;
      e.diagnostics["anm_tau"] = tau;
    }
    return est;
  }
  throw DomainError("unknown estimator '" + name + "'");
}

std::vector<MatchedError> match_targets(const RadarConfig& cfg, const std::vector<Target>& truth,
                                        const std::vector<Estimate>& est) {
  std::vector<MatchedError> out(truth.size());
  if (est.empty()) throw NumericError("estimator returned no estimates");
  const bool angle_only = std::all_of(est.begin(), est.end(), [](const Estimate& e) { return std::isnan(e.r); });

  auto cost = [&](const Target& t, const Estimate& e) {
    const double dt = (e.theta - t.theta) / kPi;
    const double dr = std::isnan(e.r) ? 0.0 : (e.r - t.r) / cfg.r_max();
    return dt * dt + dr * dr;
  };
  auto fill = [&](std::size_t ti, const Estimate& e) {
    const double dt = rad2deg(e.theta - truth[ti].theta);
    out[ti].theta_deg2 = dt * dt;
    out[ti].r_m2 = std::isnan(e.r) ? kNaN : (e.r - truth[ti].r) * (e.r - truth[ti].r);
  };

  if (angle_only || est.size() < truth.size()) {
    for (std::size_t ti = 0; ti < truth.size(); ++ti) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < est.size(); ++k)
        if (cost(truth[ti], est[k]) < cost(truth[ti], est[best])) best = k;
      fill(ti, est[best]);
    }
    return out;
  }
  std::vector<std::size_t> perm(est.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best_perm = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t ti = 0; ti < truth.size(); ++ti) c += cost(truth[ti], est[perm[ti]]);
    if (c < best_cost) {
      best_cost = c;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (std::size_t ti = 0; ti < truth.size(); ++ti) fill(ti, est[best_perm[ti]]);
  return out;
}

Table RmseTable::to_table() const {
  Table t;
  t.columns = {"sweep_axis", "sweep_value", "estimator", "rmse_r_m", "rmse_theta_deg", "n_trials", "n_failed"};
  for (const auto& r : rows)
    t.add_row({sweep_axis, r.sweep_value, r.estimator, r.rmse_r, r.rmse_theta, static_cast<double>(r.n_trials),
               static_cast<double>(r.n_failed)});
  return t;
}

RmseTable monte_carlo(const Scenario& scn, std::optional<int> trial_count) {
  scn.validate();
  const int trials = trial_count.value_or(scn.n_trials);
  if (trials < 1) throw DomainError("trial count must be >= 1");
  const GridSpec grid = scn.grid.build(scn.radar);
  const std::vector<double> values = scn.sweep.axis == "none" ? std::vector<double>{0.0} : scn.sweep.values;
  const std::size_t n_est = scn.estimators.size();

  struct Outcome {
    bool ok = false;
    double theta2 = 0.0;
    double r2 = 0.0;
  };
  const int n_tasks = static_cast<int>(values.size()) * trials;
  std::vector<std::vector<Outcome>> outcomes(n_tasks, std::vector<Outcome>(n_est));

  parallel_for(n_tasks, [&](int task) {
    const std::size_t vi = static_cast<std::size_t>(task / trials);
    const int trial = task % trials;
    OffsetModel offsets = scn.offsets;
    double snr = scn.snr_db;
    if (scn.sweep.axis == "sigma_t") offsets.sigma_t = values[vi];
    if (scn.sweep.axis == "sigma_r") offsets.sigma_r = values[vi];
    if (scn.sweep.axis == "snr") snr = values[vi];
    offsets.seed = stream_seed(scn.offsets.seed, static_cast<std::uint64_t>(trial));

    const CMatrix stack = draw_stack(scn.radar, scn.targets, offsets, snr, scn.n_pulses);
    const bool need_tau = std::any_of(scn.estimators.begin(), scn.estimators.end(), uses_anm);
    const double tau = scn.tau ? *scn.tau : need_tau ? default_tau(scn, scn.targets, offsets, snr) : 0.0;
    for (std::size_t k = 0; k < n_est; ++k) {
      Outcome& o = outcomes[task][k];
      try {
        const auto est = run_estimator(scn, scn.estimators[k], stack, grid, tau);
        for (const auto& m : match_targets(scn.radar, scn.targets, est)) {
          o.theta2 += m.theta_deg2;
          o.r2 += m.r_m2;
        }
        o.theta2 /= static_cast<double>(scn.targets.size());
        o.r2 /= static_cast<double>(scn.targets.size());
        o.ok = true;
      } catch (const NumericError&) {
        o.ok = false;
      } catch (const DomainError&) {
        o.ok = false;
      }
    }
  });

  RmseTable table;
  table.sweep_axis = scn.sweep.axis;
  for (std::size_t vi = 0; vi < values.size(); ++vi)
    for (std::size_t k = 0; k < n_est; ++k) {
      RmseRow row;
      row.sweep_value = values[vi];
      row.estimator = scn.estimators[k];
      double th = 0.0;
      double rr = 0.0;
      for (int t = 0; t < trials; ++t) {
        const Outcome& o = outcomes[vi * trials + t][k];
        if (!o.ok) {
          ++row.n_failed;
          continue;
        }
        ++row.n_trials;
        th += o.theta2;
        rr += o.r2;
      }
      row.rmse_theta = row.n_trials ? std::sqrt(th / row.n_trials) : kNaN;
      row.rmse_r = row.n_trials ? std::sqrt(rr / row.n_trials) : kNaN;
      table.rows.push_back(row);
    }
  return table;
}

Table reproduce_eqsnr_table(OffsetScenario kind, const EqSnrTableOptions& opt) {
  if (kind != OffsetScenario::kTxOnly && kind != OffsetScenario::kRxOnly)
    throw DomainError("equalized-SNR tables exist for tx-only and rx-only offsets");
  Table t;
  t.columns = {"scenario", "sigma_over_df", "delta_f_hz", "snr_model_db", "snr_empirical_db"};
  struct Cellv {
    double model;
    double empirical;
  };
  const std::size_t n = opt.sigma_over_df.size() * opt.delta_f.size();
  std::vector<Cellv> cells(n);
  parallel_for(static_cast<int>(n), [&](int idx) {
    const double ratio = opt.sigma_over_df[static_cast<std::size_t>(idx) / opt.delta_f.size()];
    const double df = opt.delta_f[static_cast<std::size_t>(idx) % opt.delta_f.size()];
    RadarConfig cfg;
    cfg.delta_f = df;
    const Target target{deg2rad(30.0), opt.r_over_rmax * cfg.r_max(), {1.0, 0.0}};
    OffsetModel off;
    off.seed = opt.seed;
    (kind == OffsetScenario::kTxOnly ? off.sigma_t : off.sigma_r) = ratio * df;
    const auto rep = equalized_snr(cfg, target, off, EqSnrMode::kBoth, opt.n_pulses);
    cells[idx] = {rep.snr_model_db, rep.snr_empirical_db};
  });
  for (std::size_t idx = 0; idx < n; ++idx)
    t.add_row({to_string(kind), opt.sigma_over_df[idx / opt.delta_f.size()], opt.delta_f[idx % opt.delta_f.size()],
               cells[idx].model, cells[idx].empirical});
  return t;
}

std::string to_string(Curve c) {
  switch (c) {
    case Curve::kApproxError: return "approx_error";
    case Curve::kEqSnrVsSigma: return "eqsnr_vs_sigma";
    case Curve::kEqSnrVsRange: return "eqsnr_vs_range";
    case Curve::kRmseVsSigmaT: return "rmse_vs_sigma_t";
    case Curve::kRmseVsSigmaR: return "rmse_vs_sigma_r";
    case Curve::kRmseVsSnr: return "rmse_vs_snr";
  }
  return "unknown";
}

const std::vector<Curve>& all_curves() {
  static const std::vector<Curve> c{Curve::kApproxError,  Curve::kEqSnrVsSigma, Curve::kEqSnrVsRange,
                                    Curve::kRmseVsSigmaT, Curve::kRmseVsSigmaR, Curve::kRmseVsSnr};
  return c;
}

Curve curve_from_string(const std::string& s) {
  for (Curve c : all_curves())
    if (to_string(c) == s) return c;
  throw DomainError("unknown figure '" + s + "'");
}

CurveResult reproduce_curve(Curve which, const CurveOptions& opt) {
  CurveResult res;
  res.name = to_string(which);
  res.provenance["experiment"] = res.name;
  res.provenance["options"] = curve_options_json(opt);

  const RadarConfig cfg = RadarConfig::defaults();
  const Target single{deg2rad(30.0), 0.4 * cfg.r_max(), {1.0, 0.0}};

  if (which == Curve::kApproxError) {
    const auto ratios = opt.sigma_over_df.value_or(ratio_axis(0.01, 0.1, 0.01));
    std::vector<ApproximationError> errs(ratios.size());
    parallel_for(static_cast<int>(ratios.size()), [&](int i) {
      OffsetModel off{ratios[i] * cfg.delta_f, ratios[i] * cfg.delta_f, opt.seed};
      errs[i] = approximation_error(cfg, single, off, opt.approx_pulses, opt.quad_tol);
    });
    res.table.columns = {"sigma_over_df", "series", "relative_error"};
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      res.table.add_row({ratios[i], std::string("tx-only"), errs[i].tx_only});
      res.table.add_row({ratios[i], std::string("rx-only"), errs[i].rx_only});
      res.table.add_row({ratios[i], std::string("both"), errs[i].both});
    }
    res.charts.push_back(chart_from_table(res.table, "sigma_over_df", "relative_error", "series",
                                          "Relative error of the first-order signal model"));
    res.charts.back().log_y = true;
    res.provenance["scene"] = {{"theta_deg", 30.0}, {"r_m", single.r}, {"radar", "defaults"}};
    return res;
  }

  if (which == Curve::kEqSnrVsSigma || which == Curve::kEqSnrVsRange) {
    std::vector<double> xs;
    if (which == Curve::kEqSnrVsSigma)
      xs = opt.sigma_over_df.value_or(ratio_axis(0.01, 0.1, 0.01));
    else
      xs = ratio_axis(0.05, 0.95, 0.05);
    struct Pt {
      EqualizedSnrReport tx;
      EqualizedSnrReport rx;
    };
    std::vector<Pt> pts(xs.size());
    parallel_for(static_cast<int>(xs.size()), [&](int i) {
      const double ratio = which == Curve::kEqSnrVsSigma ? xs[i] : 0.05;
      const double r = which == Curve::kEqSnrVsSigma ? single.r : xs[i] * cfg.r_max();
      const Target tgt{single.theta, r, {1.0, 0.0}};
      pts[i].tx = equalized_snr(cfg, tgt, OffsetModel{ratio * cfg.delta_f, 0.0, opt.seed}, EqSnrMode::kBoth,
                                opt.eqsnr_pulses);
      pts[i].rx = equalized_snr(cfg, tgt, OffsetModel{0.0, ratio * cfg.delta_f, opt.seed}, EqSnrMode::kBoth,
                                opt.eqsnr_pulses);
    });
    const std::string xcol = which == Curve::kEqSnrVsSigma ? "sigma_over_df" : "r_over_rmax";
    res.table.columns = {xcol, "series", "equalized_snr_db"};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      res.table.add_row({xs[i], std::string("tx model"), pts[i].tx.snr_model_db});
      res.table.add_row({xs[i], std::string("tx empirical"), pts[i].tx.snr_empirical_db});
      res.table.add_row({xs[i], std::string("rx model"), pts[i].rx.snr_model_db});
      res.table.add_row({xs[i], std::string("rx empirical"), pts[i].rx.snr_empirical_db});
    }
    res.charts.push_back(chart_from_table(res.table, xcol, "equalized_snr_db", "series",
                                          which == Curve::kEqSnrVsSigma ? "Equalized SNR vs offset std"
                                                                        : "Equalized SNR vs range (sigma = 0.05 df)"));
    res.provenance["scene"] = {{"theta_deg", 30.0},
                               {"r_m", which == Curve::kEqSnrVsSigma ? Json(single.r) : Json("swept")},
                               {"radar", "defaults"}};
    return res;
  }

  // RMSE curves: single target at 0.4 r_max and a co-angle pair (0.4 r_max, 9000 m).
  Scenario base = Scenario::defaults();
  base.grid = opt.grid;
  base.n_pulses = opt.n_pulses;
  base.offsets = OffsetModel{0.0, 0.0, opt.seed};
  base.snr_db = 50.0;
  std::string xcol = "sigma_over_df";
  std::vector<double> xs;
  if (which == Curve::kRmseVsSnr) {
    base.sweep.axis = "snr";
    xs = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
    base.sweep.values = xs;
    xcol = "snr_db";
  } else {
    base.sweep.axis = which == Curve::kRmseVsSigmaT ? "sigma_t" : "sigma_r";
    xs = opt.sigma_over_df.value_or(std::vector<double>{0.02, 0.04, 0.06, 0.08, 0.1});
    base.sweep.values.clear();
    for (double x : xs) base.sweep.values.push_back(x * cfg.delta_f);
  }

  std::vector<std::string> plain;
  std::vector<std::string> heavy;
  for (const auto& e : opt.estimators) (uses_anm(e) ? heavy : plain).push_back(e);

  res.table.columns = {"variant", "estimator", xcol, "rmse_r_m", "rmse_theta_deg", "n_trials", "n_failed"};
  res.provenance["scenarios"] = Json::array();
  res.provenance["notes"] = Json::array({"dual-target variant places both targets at 30 deg, ranges 0.4 r_max and 9000 m",
                                         "estimators using ANM run anm_trials trials"});
  for (const std::string variant : {"single", "dual"}) {
    Scenario scn = base;
    scn.targets = {single};
    if (variant == std::string("dual")) scn.targets.push_back(Target{single.theta, 9000.0, {1.0, 0.0}});
    for (const auto* group : {&plain, &heavy}) {
      if (group->empty()) continue;
      scn.estimators = *group;
      scn.n_trials = group == &heavy ? opt.anm_trials : opt.n_trials;
      res.provenance["scenarios"].push_back(to_json(scn));
      const RmseTable rt = monte_carlo(scn);
      for (std::size_t i = 0; i < rt.rows.size(); ++i) {
        const auto& row = rt.rows[i];
        const double x = which == Curve::kRmseVsSnr ? row.sweep_value : row.sweep_value / cfg.delta_f;
        res.table.add_row({std::string(variant), row.estimator, x, row.rmse_r, row.rmse_theta,
                           static_cast<double>(row.n_trials), static_cast<double>(row.n_failed)});
      }
    }
  }
  Table labelled = res.table;
  labelled.columns.push_back("series");
  for (auto& row : labelled.rows) row.push_back(std::get<std::string>(row[0]) + " " + std::get<std::string>(row[1]));
  res.charts.push_back(chart_from_table(labelled, xcol, "rmse_r_m", "series", "Range RMSE (" + res.name + ")"));
  res.charts.back().log_y = true;
  res.charts.push_back(chart_from_table(labelled, xcol, "rmse_theta_deg", "series", "DOA RMSE (" + res.name + ")"));
  res.charts.back().log_y = true;
  return res;
}

std::vector<std::string> write_curve(const CurveResult& res, const std::string& out_dir, const std::string& stamp) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
  std::vector<std::string> paths;
  const std::string stem = (fs::path(out_dir) / (res.name + "-" + stamp)).string();
  emit(res.table, Format::kCsv, stem + ".csv");
  paths.push_back(stem + ".csv");
  for (std::size_t i = 0; i < res.charts.size(); ++i) {
    const std::string path =
        i == 0 ? stem + ".svg" : (fs::path(out_dir) / (res.name + "_" + std::to_string(i + 1) + "-" + stamp)).string() + ".svg";
    emit(res.table, Format::kSvg, path, &res.charts[i]);
    paths.push_back(path);
  }
  Json prov = res.provenance;
  prov["timestamp"] = stamp;
  prov["table"] = table_to_json(res.table);
  write_text(stem + ".json", prov.dump(2) + "\n");
  paths.push_back(stem + ".json");
  return paths;
}

}  // namespace fdamimo
