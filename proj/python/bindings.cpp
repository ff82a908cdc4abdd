#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdamimo/cli.hpp"
#include "fdamimo/crlb.hpp"
#include "fdamimo/estimators.hpp"

namespace py = pybind11;
using namespace fdamimo;

namespace {

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["theta"] = e.theta;
  d["r"] = e.r;
  d["amplitude"] = e.amplitude;
  d["method"] = e.method;
  d["diagnostics"] = e.diagnostics;
  return d;
}

py::list estimate_list(const std::vector<Estimate>& es) {
  py::list out;
  for (const auto& e : es) out.append(estimate_dict(e));
  return out;
}

EqSnrMode mode_from_string(const std::string& s) {
  if (s == "model") return EqSnrMode::kModel;
  if (s == "empirical") return EqSnrMode::kEmpirical;
  if (s == "both") return EqSnrMode::kBoth;
  throw DomainError("mode must be model, empirical or both");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FDA-MIMO range-angle estimation under carrier-frequency offsets";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<RadarConfig>(m, "RadarConfig")
      .def(py::init<>())
      .def_readwrite("n_tx", &RadarConfig::n_tx)
      .def_readwrite("n_rx", &RadarConfig::n_rx)
      .def_readwrite("f0", &RadarConfig::f0)
      .def_readwrite("delta_f", &RadarConfig::delta_f)
      .def_readwrite("energy", &RadarConfig::energy)
      .def_readwrite("c", &RadarConfig::c)
      .def_property_readonly("r_max", &RadarConfig::r_max)
      .def_property_readonly("t_p", &RadarConfig::t_p)
      .def_property_readonly("mn", &RadarConfig::mn);

  py::class_<Target>(m, "Target")
      .def(py::init([](double theta, double r, Complex alpha) { return Target{theta, r, alpha}; }), py::arg("theta"),
           py::arg("r"), py::arg("alpha") = Complex(1.0, 0.0))
      .def_readwrite("theta", &Target::theta)
      .def_readwrite("r", &Target::r)
      .def_readwrite("alpha", &Target::alpha)
      .def("beta", &Target::beta);

  py::class_<OffsetModel>(m, "OffsetModel")
      .def(py::init([](double sigma_t, double sigma_r, std::uint64_t seed) {
             return OffsetModel{sigma_t, sigma_r, seed};
           }),
           py::arg("sigma_t") = 0.0, py::arg("sigma_r") = 0.0, py::arg("seed") = 0)
      .def_readwrite("sigma_t", &OffsetModel::sigma_t)
      .def_readwrite("sigma_r", &OffsetModel::sigma_r)
      .def_readwrite("seed", &OffsetModel::seed);

  py::class_<GridSpec>(m, "GridSpec")
      .def_static("defaults", &GridSpec::defaults)
      .def_static("uniform", &GridSpec::uniform, py::arg("theta_lo_deg"), py::arg("theta_hi_deg"),
                  py::arg("theta_step_deg"), py::arg("r_lo"), py::arg("r_step"), py::arg("n_r"))
      .def_readonly("theta", &GridSpec::theta)
      .def_readonly("r", &GridSpec::r);

  m.def("steering_vector", [](const RadarConfig& cfg, double theta, double r) {
    return steering_vectors(cfg, theta, r).a_joint;
  });

  m.def(
      "draw_stack",
      [](const RadarConfig& cfg, const std::vector<Target>& targets, const OffsetModel& offsets, double snr_db,
         int n_pulses) { return draw_stack(cfg, targets, offsets, snr_db, n_pulses); },
      py::arg("cfg"), py::arg("targets"), py::arg("offsets"), py::arg("snr_db"), py::arg("n_pulses"));

  m.def(
      "covariance_model",
      [](const RadarConfig& cfg, const Target& t, const OffsetModel& off, double noise_var) {
        const auto c = covariance_model(cfg, t, off, noise_var);
        py::dict d;
        d["c0"] = c.c0;
        d["ct"] = c.ct;
        d["cr"] = c.cr;
        d["c_total"] = c.c_total;
        d["c_tilde"] = c.c_tilde;
        return d;
      },
      py::arg("cfg"), py::arg("target"), py::arg("offsets"), py::arg("noise_var") = 0.0);

  m.def(
      "equalized_snr",
      [](const RadarConfig& cfg, const Target& t, const OffsetModel& off, const std::string& mode, int n_pulses) {
        const auto r = equalized_snr(cfg, t, off, mode_from_string(mode), n_pulses);
        py::dict d;
        d["snr_model_db"] = r.snr_model_db;
        d["snr_empirical_db"] = r.snr_empirical_db;
        d["scenario"] = to_string(r.scenario);
        d["sigma_over_df"] = r.sigma_over_df;
        d["r_over_rmax"] = r.r_over_rmax;
        return d;
      },
      py::arg("cfg"), py::arg("target"), py::arg("offsets"), py::arg("mode") = "model", py::arg("n_pulses") = 0);

  m.def(
      "crlb",
      [](const RadarConfig& cfg, const Target& t, const OffsetModel& off, double sigma0, int n_pulses) {
        const auto f = fim(cfg, t, off, sigma0, n_pulses);
        py::dict d;
        d["f_rr"] = f.f_rr;
        d["f_theta_theta"] = f.f_theta_theta;
        d["crlb_r"] = f.crlb_r;
        d["crlb_theta"] = f.crlb_theta;
        return d;
      },
      py::arg("cfg"), py::arg("target"), py::arg("offsets"), py::arg("sigma0"), py::arg("n_pulses") = 1);

  m.def("music_2d", [](const RadarConfig& cfg, const CMatrix& stack, const GridSpec& grid, int n_targets) {
    return estimate_list(music_2d(cfg, stack, grid, n_targets).estimates);
  });
  m.def("music_rows",
        [](const RadarConfig& cfg, const CMatrix& stack, const std::vector<double>& theta_axis, int n_targets) {
          return estimate_list(music_rows(cfg, stack, theta_axis, n_targets).estimates);
        });
  m.def("omp", [](const RadarConfig& cfg, const CMatrix& stack, const GridSpec& grid, int n_targets) {
    return estimate_list(omp(cfg, stack, grid, n_targets).estimates);
  });

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
