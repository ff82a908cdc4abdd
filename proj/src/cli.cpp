#include "fdamimo/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fdamimo/crlb.hpp"
#include "fdamimo/experiments.hpp"

namespace fdamimo {
namespace {

struct Options {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> pulses;
  std::string method;
  std::string table;
  std::string figure = "all";
  std::string sigma_over_df;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Scenario JSON file (angles in degrees, SI units)");
  cmd->add_option("--out", o.out_dir, "Output directory for written files");
  cmd->add_option("--seed", o.seed, "Master seed (default 0)");
  cmd->add_option("--trials", o.trials, "Monte-Carlo trials");
  cmd->add_option("--pulses", o.pulses, "Pulses per trial (L)");
  cmd->add_option("overrides", o.overrides, "Dotted key=value overrides, e.g. offsets.sigma_t=500");
}

Scenario resolve(const Options& o) {
  Json j = to_json(o.config.empty() ? Scenario::defaults() : load_scenario(o.config));
  for (const auto& ov : o.overrides) apply_override(j, ov);
  if (o.seed) j["offsets"]["seed"] = *o.seed;
  if (o.trials) j["n_trials"] = *o.trials;
  if (o.pulses) j["n_pulses"] = *o.pulses;
  if (!o.method.empty()) j["estimators"] = Json::array({o.method});
  Scenario s = scenario_from_json(j);
  s.validate();
  return s;
}

Json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string out_path(const Options& o, const std::string& name, const std::string& stamp, const std::string& ext) {
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / (name + "-" + stamp + "." + ext)).string();
}

std::vector<double> sigma_values(const Options& o, double delta_f, std::vector<double> fallback) {
  if (o.sigma_over_df.empty()) return fallback;
  std::vector<double> v = parse_range_spec(o.sigma_over_df);
  for (double& x : v) x *= delta_f;
  return v;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const Scenario s = resolve(o);
  const CMatrix stack = draw_stack(s.radar, s.targets, s.offsets, s.snr_db, s.n_pulses);
  Table t;
  t.columns = {"pulse", "m", "n", "re", "im"};
  for (Eigen::Index l = 0; l < stack.cols(); ++l)
    for (int n = 0; n < s.radar.n_tx; ++n)
      for (int m = 0; m < s.radar.n_rx; ++m) {
        const Complex z = stack(n * s.radar.n_rx + m, l);
        t.add_row({static_cast<double>(l), static_cast<double>(m + 1), static_cast<double>(n + 1), z.real(), z.imag()});
      }
  const std::string stamp = timestamp();
  const std::string path = out_path(o, "simulate", stamp, "csv");
  emit(t, Format::kCsv, path);
  Json first = Json::array();
  for (int m = 0; m < s.radar.n_rx; ++m) {
    Json row = Json::array();
    for (int n = 0; n < s.radar.n_tx; ++n) row.push_back(complex_json(stack(n * s.radar.n_rx + m, 0)));
    first.push_back(row);
  }
  out << Json{{"scenario", to_json(s)}, {"outputs", {path}}, {"first_pulse", first}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_eqsnr(const Options& o, std::ostream& out) {
  const Scenario s = resolve(o);
  if (!o.table.empty()) {
    OffsetScenario kind;
    if (o.table == "tx") kind = OffsetScenario::kTxOnly;
    else if (o.table == "rx") kind = OffsetScenario::kRxOnly;
    else throw ConfigError("--table must be tx or rx");
    EqSnrTableOptions opt;
    opt.seed = s.offsets.seed;
    opt.n_pulses = o.pulses.value_or(1000);
    if (!o.sigma_over_df.empty()) opt.sigma_over_df = parse_range_spec(o.sigma_over_df);
    const Table t = reproduce_eqsnr_table(kind, opt);
    const std::string stamp = timestamp();
    const std::string path = out_path(o, "eqsnr_" + o.table, stamp, "csv");
    emit(t, Format::kCsv, path);
    out << Json{{"scenario", to_json(s)}, {"outputs", {path}}, {"table", table_to_json(t)}}.dump(2) << "\n";
    return kExitOk;
  }
  Json reports = Json::array();
  for (const auto& tgt : s.targets) {
    const auto rep = equalized_snr(s.radar, tgt, s.offsets, EqSnrMode::kBoth, o.pulses.value_or(1000));
    const auto st = structure_report(covariance_model(s.radar, tgt, s.offsets));
    reports.push_back({{"equalized_snr", to_json(rep)}, {"structure", to_json(st)}});
  }
  out << Json{{"scenario", to_json(s)}, {"reports", reports}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  const Scenario s = resolve(o);
  const GridSpec grid = s.grid.build(s.radar);
  const CMatrix stack = draw_stack(s.radar, s.targets, s.offsets, s.snr_db, s.n_pulses);
  const double tau = s.tau ? *s.tau : default_tau(s, s.targets, s.offsets, s.snr_db);
  Json est = Json::array();
  for (const auto& name : s.estimators)
    for (const auto& e : run_estimator(s, name, stack, grid, tau)) est.push_back(to_json(e));
  out << Json{{"scenario", to_json(s)}, {"estimates", est}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_crlb(const Options& o, std::ostream& out) {
  Scenario s = resolve(o);
  if (!o.sigma_over_df.empty()) {
    if (s.sweep.axis != "sigma_t") s.sweep.axis = "sigma_r";
    s.sweep.values = sigma_values(o, s.radar.delta_f, {});
  }
  const Target& tgt = s.targets.front();
  const double sigma0 = std::sqrt(white_noise_variance(s.radar, s.targets, s.snr_db));
  Json result;
  if (s.sweep.axis == "none") {
    const FimReport f = fim(s.radar, tgt, s.offsets, sigma0, s.n_pulses);
    result = {{"f_rr", f.f_rr},         {"f_theta_theta", f.f_theta_theta}, {"crlb_r_m2", f.crlb_r},
              {"crlb_theta_rad2", f.crlb_theta}, {"cond_c", f.cond_c}, {"cond_c_tilde", f.cond_c_tilde},
              {"n_pulses", f.n_pulses}};
    out << Json{{"scenario", to_json(s)}, {"fim", result}}.dump(2) << "\n";
    return kExitOk;
  }
  const CrlbCurve c =
      crlb_curve(s.radar, tgt, s.offsets, s.snr_db, sweep_axis_from_string(s.sweep.axis), s.sweep.values, s.n_pulses);
  Table t;
  t.columns = {"sweep_value", "crlb_r_m2", "crlb_theta_rad2"};
  for (const auto& r : c.rows) t.add_row({r.value, r.crlb_r, r.crlb_theta});
  const std::string path = out_path(o, "crlb_" + s.sweep.axis, timestamp(), "csv");
  emit(t, Format::kCsv, path);
  out << Json{{"scenario", to_json(s)},
              {"outputs", {path}},
              {"crlb_r_nondecreasing", c.crlb_r_nondecreasing},
              {"crlb_theta_constant", c.crlb_theta_constant},
              {"table", table_to_json(t)}}
             .dump(2)
      << "\n";
  return kExitOk;
}

int cmd_mc(const Options& o, std::ostream& out) {
  Scenario s = resolve(o);
  if (!o.sigma_over_df.empty()) {
    if (s.sweep.axis != "sigma_t") s.sweep.axis = "sigma_r";
    s.sweep.values = sigma_values(o, s.radar.delta_f, {});
  }
  const RmseTable rt = monte_carlo(s);
  const Table t = rt.to_table();
  const std::string stamp = timestamp();
  const std::string csv = out_path(o, "mc", stamp, "csv");
  const std::string js = out_path(o, "mc", stamp, "json");
  emit(t, Format::kCsv, csv);
  write_text(js, Json{{"scenario", to_json(s)}, {"table", table_to_json(t)}}.dump(2) + "\n");
  out << Json{{"scenario", to_json(s)}, {"outputs", {csv, js}}, {"table", table_to_json(t)}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_figures(const Options& o, std::ostream& out) {
  const Scenario s = resolve(o);
  CurveOptions opt;
  opt.seed = s.offsets.seed;
  if (o.trials) opt.n_trials = *o.trials;
  if (o.pulses) opt.n_pulses = *o.pulses;
  opt.grid = s.grid;
  if (!o.sigma_over_df.empty()) opt.sigma_over_df = parse_range_spec(o.sigma_over_df);
  if (!o.method.empty()) opt.estimators = {o.method};
  std::vector<Curve> which;
  if (o.figure == "all") which = all_curves();
  else which = {curve_from_string(o.figure)};
  const std::string stamp = timestamp();
  Json outputs = Json::array();
  for (Curve c : which) {
    const CurveResult res = reproduce_curve(c, opt);
    for (const auto& p : write_curve(res, o.out_dir, stamp)) outputs.push_back(p);
  }
  out << Json{{"scenario", to_json(s)}, {"outputs", outputs}}.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

std::vector<double> parse_range_spec(const std::string& spec) {
  std::stringstream ss(spec);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c) )
    throw ConfigError("range '" + spec + "' must be start:step:count");
  double start = 0.0, step = 0.0;
  int count = 0;
  try {
    start = std::stod(a);
    step = std::stod(b);
    count = std::stoi(c);
  } catch (const std::exception&) {
    throw ConfigError("range '" + spec + "' must be start:step:count");
  }
  if (count < 1) throw ConfigError("range '" + spec + "' needs count >= 1");
  std::vector<double> v;
  for (int k = 0; k < count; ++k) v.push_back(std::round((start + k * step) * 1e12) / 1e12);
  return v;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FDA-MIMO range-angle estimation under frequency offsets"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Draw a multi-pulse stack and write it as CSV");
  auto* eq = app.add_subcommand("eqsnr", "Equalized SNR of the scenario or a reproduced table");
  auto* est = app.add_subcommand("estimate", "Run estimators on one simulated stack");
  auto* crlb = app.add_subcommand("crlb", "Fisher information and CRLB, optionally swept");
  auto* mc = app.add_subcommand("mc", "Monte-Carlo RMSE table");
  auto* fig = app.add_subcommand("figures", "Reproduce curve data and SVG charts");
  for (auto* cmd : {sim, eq, est, crlb, mc, fig}) add_common(cmd, o);
  for (auto* cmd : {est, mc, fig})
    cmd->add_option("--method", o.method, "Estimator: music2d, music_rows, music_c4, omp, omp_anm, anm_music");
  eq->add_option("--table", o.table, "Reproduce the tx or rx equalized-SNR table")->check(CLI::IsMember({"tx", "rx"}));
  fig->add_option("--figure", o.figure,
                  "approx_error, eqsnr_vs_sigma, eqsnr_vs_range, rmse_vs_sigma_t, rmse_vs_sigma_r, rmse_vs_snr or all");
  for (auto* cmd : {eq, crlb, mc, fig})
    cmd->add_option("--sigma-over-df", o.sigma_over_df, "Offset sweep as start:step:count in units of delta_f");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const bool help = e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success);
    app.exit(e, out, err);
    return help ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (eq->parsed()) return cmd_eqsnr(o, out);
    if (est->parsed()) return cmd_estimate(o, out);
    if (crlb->parsed()) return cmd_crlb(o, out);
    if (mc->parsed()) return cmd_mc(o, out);
    if (fig->parsed()) return cmd_figures(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitDomain;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace fdamimo
