#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "tcs/analysis.hpp"
#include "tcs/diagnostics.hpp"
#include "tcs/harness.hpp"
#include "tcs/model.hpp"

namespace py = pybind11;

namespace {

py::dict conditions_to_dict(const tcs::HypothesisReport& rep) {
  py::dict d;
  py::list conditions;
  for (const tcs::ConditionResult& c : rep.conditions) {
    py::dict row;
    row["name"] = c.name;
    row["satisfied"] = c.satisfied;
    row["lhs"] = c.lhs;
    row["rhs"] = c.rhs;
    row["slack"] = c.slack;
    conditions.append(row);
  }
  d["conditions"] = conditions;
  d["overall"] = rep.overall;
  return d;
}

py::dict constants_to_dict(const tcs::HypothesisConstants& c) {
  py::dict d;
  d["T_m"] = c.T_m;
  d["T_M"] = c.T_M;
  d["eps"] = c.eps;
  d["eps0"] = c.eps0;
  d["delta_star"] = c.delta_star;
  d["lambda"] = c.lambda;
  d["gamma"] = c.gamma;
  d["A1"] = c.A1;
  d["A2"] = c.A2;
  d["Z0_sq"] = c.Z0_sq;
  d["X0"] = c.X0;
  d["V0"] = c.V0;
  d["zc0_norm"] = c.zc0_norm;
  d["phi0"] = c.phi0;
  d["phi_ball"] = c.phi_ball;
  d["zeta_ball"] = c.zeta_ball;
  return d;
}

py::dict report_to_dict(const tcs::RunReport& rep) {
  py::dict d;
  d["exit_code"] = rep.exit_code;
  d["gate"] = rep.gate == tcs::GateVariant::strict ? "strict" : "relaxed";
  d["hypotheses_ok"] = rep.hypotheses_ok();
  if (rep.has_constants) {
    d["constants"] = constants_to_dict(rep.strict.constants);
    d["Tnorm0"] = rep.Tnorm0;
    d["strict"] = conditions_to_dict(rep.strict);
    d["relaxed"] = conditions_to_dict(rep.relaxed);
  } else {
    d["constants_error"] = rep.constants_error;
  }
  if (rep.drift) {
    py::dict drift;
    drift["energy_rel"] = rep.drift->energy_rel;
    drift["com_error"] = rep.drift->com_error;
    drift["mean_residual"] = rep.drift->mean_residual;
    drift["identity_error"] = rep.drift->identity_error;
    drift["within_tolerances"] = rep.drift->within_tolerances();
    d["drift"] = drift;
  }
  if (rep.decay) {
    py::dict decay;
    decay["refused"] = rep.decay->refused;
    decay["refusal_reason"] = rep.decay->refusal_reason;
    decay["checked"] = rep.decay->checked;
    decay["mechanical_violations"] = rep.decay->mechanical.size();
    decay["temperature_violations"] = rep.decay->temperature.size();
    d["decay"] = decay;
  }
  if (rep.dissipation) {
    py::dict diss;
    diss["refused"] = rep.dissipation->refused;
    diss["refusal_reason"] = rep.dissipation->refusal_reason;
    diss["samples_checked"] = rep.dissipation->samples_checked;
    diss["out_of_range"] = rep.dissipation->out_of_range.size();
    diss["violations"] = rep.dissipation->violations.size();
    d["dissipation"] = diss;
  }
  py::list fits;
  for (const tcs::DecayFit& f : rep.fits) {
    py::dict row;
    row["quantity"] = f.quantity;
    row["rate"] = f.rate;
    row["intercept"] = f.intercept;
    row["r_squared"] = f.r_squared;
    row["window_start"] = f.window_start;
    row["window_end"] = f.window_end;
    row["samples"] = f.samples;
    fits.append(row);
  }
  d["fits"] = fits;
  if (!rep.error.empty()) d["error"] = rep.error;
  return d;
}

py::dict trajectory_to_dict(const tcs::Trajectory& traj) {
  py::dict d;
  const std::size_t m = traj.records.size();
  std::vector<double> t, X, V, Tnorm, E, Tinf, L, minT, maxT;
  t.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const tcs::DiagnosticsRecord& r = traj.records[i];
    t.push_back(r.t);
    X.push_back(r.X);
    V.push_back(r.V);
    Tnorm.push_back(r.Tnorm);
    E.push_back(r.energy);
    Tinf.push_back(r.T_inf);
    L.push_back(r.lyapunov);
    minT.push_back(r.minT);
    maxT.push_back(r.maxT);
  }
  d["t"] = std::move(t);
  d["X"] = std::move(X);
  d["V"] = std::move(V);
  d["Tnorm"] = std::move(Tnorm);
  d["E"] = std::move(E);
  d["Tinf"] = std::move(Tinf);
  d["L"] = std::move(L);
  d["minT"] = std::move(minT);
  d["maxT"] = std::move(maxT);
  return d;
}

tcs::GateVariant variant_from_string(const std::string& name) {
  if (name == "strict") return tcs::GateVariant::strict;
  if (name == "relaxed") return tcs::GateVariant::relaxed;
  throw tcs::ConfigError("variant must be 'strict' or 'relaxed', got '" +
                         name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Thermodynamic flocking in a harmonic potential";

  py::register_exception<tcs::ConfigError>(m, "ConfigError",
                                           PyExc_ValueError);

  py::class_<tcs::Interval>(m, "Interval")
      .def(py::init<>())
      .def(py::init([](double lo, double hi) {
        return tcs::Interval{lo, hi};
      }))
      .def_readwrite("lo", &tcs::Interval::lo)
      .def_readwrite("hi", &tcs::Interval::hi)
      .def("width", &tcs::Interval::width)
      .def("midpoint", &tcs::Interval::midpoint)
      .def("__repr__", [](const tcs::Interval& i) {
        return "Interval(" + std::to_string(i.lo) + ", " +
               std::to_string(i.hi) + ")";
      });

  py::class_<tcs::ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("n", &tcs::ScenarioConfig::n)
      .def_readwrite("dim", &tcs::ScenarioConfig::dim)
      .def_readwrite("position_box", &tcs::ScenarioConfig::position_box)
      .def_readwrite("velocity_box", &tcs::ScenarioConfig::velocity_box)
      .def_readwrite("temperature_interval",
                     &tcs::ScenarioConfig::temperature_interval)
      .def_readwrite("seed", &tcs::ScenarioConfig::seed)
      .def_readwrite("kappa1", &tcs::ScenarioConfig::kappa1)
      .def_readwrite("kappa2", &tcs::ScenarioConfig::kappa2)
      .def_readwrite("phi_amplitude", &tcs::ScenarioConfig::phi_amplitude)
      .def_readwrite("phi_exponent", &tcs::ScenarioConfig::phi_exponent)
      .def_readwrite("zeta_amplitude", &tcs::ScenarioConfig::zeta_amplitude)
      .def_readwrite("zeta_exponent", &tcs::ScenarioConfig::zeta_exponent)
      .def_readwrite("dt", &tcs::ScenarioConfig::dt)
      .def_readwrite("t_end", &tcs::ScenarioConfig::t_end)
      .def_readwrite("record_stride", &tcs::ScenarioConfig::record_stride)
      .def_readwrite("eps", &tcs::ScenarioConfig::eps)
      .def_readwrite("eps0", &tcs::ScenarioConfig::eps0)
      .def("validate", &tcs::ScenarioConfig::validate);

  py::class_<tcs::ParticleEnsemble>(m, "ParticleEnsemble")
      .def_readonly("n", &tcs::ParticleEnsemble::n)
      .def_readonly("dim", &tcs::ParticleEnsemble::dim)
      .def_readonly("x", &tcs::ParticleEnsemble::x)
      .def_readonly("v", &tcs::ParticleEnsemble::v)
      .def_readonly("T", &tcs::ParticleEnsemble::T);

  m.def("preset", &tcs::preset, py::arg("name"),
        "Return a named scenario configuration");
  m.def("parse_config", &tcs::parse_config, py::arg("text"),
        "Parse a key = value scenario description");
  m.def("load_config", &tcs::load_config, py::arg("path"),
        "Load a scenario description from a file");
  m.def("config_to_string", &tcs::config_to_string, py::arg("config"),
        "Serialize a scenario to its canonical text form");
  m.def(
      "apply_override",
      [](tcs::ScenarioConfig& cfg, const std::string& assignment) {
        tcs::apply_override(cfg, assignment);
      },
      py::arg("config"), py::arg("assignment"),
      "Apply a key=value override to a scenario");
  m.def("sample_initial_data", &tcs::sample_initial_data, py::arg("config"),
        "Draw the deterministic initial ensemble for a scenario");

  m.def(
      "check",
      [](const tcs::ScenarioConfig& cfg, const std::string& variant) {
        return report_to_dict(
            tcs::run_check(cfg, variant_from_string(variant)));
      },
      py::arg("config"), py::arg("variant") = "strict",
      "Evaluate the flocking hypotheses without integrating");

  m.def(
      "simulate",
      [](const tcs::ScenarioConfig& cfg, const std::string& variant) {
        tcs::Trajectory traj;
        const tcs::RunReport rep =
            tcs::run_simulation(cfg, variant_from_string(variant), &traj);
        py::dict d = report_to_dict(rep);
        d["timeseries"] = trajectory_to_dict(traj);
        return d;
      },
      py::arg("config"), py::arg("variant") = "strict",
      "Integrate a scenario and verify its decay bounds");

  m.def(
      "fit_exponential",
      [](const std::vector<double>& times, const std::vector<double>& values,
         double window_start, double window_end, const std::string& quantity) {
        const tcs::DecayFit f = tcs::fit_exponential(
            times, values, window_start, window_end, quantity);
        py::dict d;
        d["quantity"] = f.quantity;
        d["rate"] = f.rate;
        d["intercept"] = f.intercept;
        d["r_squared"] = f.r_squared;
        d["window_start"] = f.window_start;
        d["window_end"] = f.window_end;
        d["samples"] = f.samples;
        return d;
      },
      py::arg("times"), py::arg("values"), py::arg("window_start"),
      py::arg("window_end"), py::arg("quantity") = "",
      "Least-squares exponential fit over a time window");

  m.def(
      "gronwall_bound",
      [](double y0, double c1, double c2, double c3, double t) {
        return tcs::gronwall_bound(y0, c1, c2, c3, t).value;
      },
      py::arg("y0"), py::arg("c1"), py::arg("c2"), py::arg("c3"),
      py::arg("t"),
      "Closed-form bound for y' <= -c1 y + c2 exp(-c3 t)");

  m.attr("EXIT_OK") = tcs::kExitOk;
  m.attr("EXIT_USAGE") = tcs::kExitUsage;
  m.attr("EXIT_VIOLATION") = tcs::kExitViolation;
  m.attr("EXIT_UNSATISFIED") = tcs::kExitUnsatisfied;
  m.attr("EXIT_NUMERICAL") = tcs::kExitNumerical;
}
