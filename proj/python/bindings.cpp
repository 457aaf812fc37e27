#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rpl/dynamics.hpp"
#include "rpl/errors.hpp"
#include "rpl/fgr.hpp"
#include "rpl/ground_state.hpp"
#include "rpl/linearization.hpp"
#include "rpl/pipeline.hpp"
#include "rpl/profile.hpp"
#include "rpl/resonance.hpp"

namespace py = pybind11;
using namespace rpl;

namespace {

py::dict hypothesis(const HypothesisStatus& h) {
  py::dict d;
  d["status"] = status_name(h.status);
  d["evidence"] = h.evidence;
  d["note"] = h.note;
  return d;
}

std::vector<std::string> names(const std::vector<MultiIndex>& v) {
  std::vector<std::string> out;
  for (const auto& m : v) out.push_back(m.str());
  return out;
}

}  // namespace

PYBIND11_MODULE(_rpl, m) {
  m.doc() = "refined profiles, FGR coefficients and hypothesis checks for radial NLS solitons";

  static py::exception<Error> exc(m, "RplError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, e.what());
    }
  });

  py::class_<Nonlinearity>(m, "Nonlinearity")
      .def_static("polynomial", &Nonlinearity::polynomial, py::arg("coefficients"))
      .def_static("rational", &Nonlinearity::rational, py::arg("numerator"), py::arg("denominator"))
      .def_static("saturated_quintic", &Nonlinearity::saturated_quintic, py::arg("sigma") = 1.0)
      .def("evaluate", &Nonlinearity::evaluate, py::arg("s"), py::arg("max_order"))
      .def("value", &Nonlinearity::value)
      .def("describe", &Nonlinearity::describe)
      .def_readonly("numerator", &Nonlinearity::numerator)
      .def_readonly("denominator", &Nonlinearity::denominator);

  m.def(
      "growth_report",
      [](const Nonlinearity& nl) {
        auto g = growth_report(nl, default_growth_samples());
        return py::dict(py::arg("sup_ratio") = g.sup_ratio, py::arg("flagged") = g.flagged, py::arg("passed") = g.pass);
      },
      py::arg("nl"));

  py::class_<RadialGrid>(m, "RadialGrid")
      .def(py::init<int, double, double, int>(), py::arg("dimension"), py::arg("R"), py::arg("h"), py::arg("order") = 4)
      .def_property_readonly("dimension", &RadialGrid::dimension)
      .def_property_readonly("R", &RadialGrid::R)
      .def_property_readonly("h", &RadialGrid::h)
      .def_property_readonly("size", &RadialGrid::size)
      .def_property_readonly("r", &RadialGrid::r)
      .def_property_readonly("weights", &RadialGrid::weights)
      .def("norm", py::overload_cast<const Vec&>(&RadialGrid::norm, py::const_))
      .def("hash", &RadialGrid::hash_hex);

  py::class_<GroundState>(m, "GroundState")
      .def_readonly("omega", &GroundState::omega)
      .def_readonly("phi", &GroundState::phi)
      .def_readonly("dphi", &GroundState::dphi)
      .def_readonly("mass", &GroundState::mass)
      .def_readonly("dmass", &GroundState::dmass)
      .def_readonly("residual", &GroundState::residual)
      .def_readonly("dphi_residual", &GroundState::dphi_residual);

  m.def(
      "solve_ground_state",
      [](const Nonlinearity& nl, double omega, const RadialGrid& g, double tol) {
        GroundStateOptions o;
        o.tol = tol;
        return solve_ground_state(nl, omega, g, std::nullopt, o);
      },
      py::arg("nl"), py::arg("omega"), py::arg("grid"), py::arg("tol") = 1e-10);

  py::class_<Operators>(m, "Operators")
      .def_readonly("omega", &Operators::omega)
      .def_readonly("lminus_phi", &Operators::lminus_phi)
      .def_readonly("lplus_dphi", &Operators::lplus_dphi);
  m.def("build_operators", &build_operators, py::arg("gs"), py::arg("nl"), py::arg("grid"));

  py::class_<InternalMode>(m, "InternalMode")
      .def_readonly("j", &InternalMode::j)
      .def_readonly("lam", &InternalMode::lambda)
      .def_readonly("xi_plus", &InternalMode::xi_plus)
      .def_readonly("xi_minus", &InternalMode::xi_minus)
      .def_readonly("residual", &InternalMode::residual);

  m.def(
      "discrete_spectrum",
      [](const Operators& op) {
        auto sp = discrete_spectrum(op);
        check_assumptions(sp.report, Tolerances{});
        const auto& r = sp.report;
        py::dict d;
        d["morse_index"] = r.morse_index;
        d["ker_lplus"] = r.ker_lplus;
        d["ker_lminus"] = r.ker_lminus;
        d["n_modes"] = r.n_modes;
        d["lambdas"] = r.lambdas;
        d["lplus_eigs"] = r.lplus_eigs;
        d["lminus_eigs"] = r.lminus_eigs;
        d["krein_defect"] = r.max_krein_defect;
        d["H1"] = hypothesis(r.H1);
        d["H3"] = hypothesis(r.H3);
        d["H4"] = hypothesis(r.H4);
        d["H5"] = hypothesis(r.H5);
        d["modes"] = sp.modes;
        return d;
      },
      py::arg("op"));

  py::class_<ResonanceStructure>(m, "ResonanceStructure")
      .def_readonly("N", &ResonanceStructure::N)
      .def_readonly("K_max", &ResonanceStructure::K_max)
      .def_property_readonly("R_min", [](const ResonanceStructure& r) { return names(r.R_min); })
      .def_property_readonly("NR", [](const ResonanceStructure& r) { return names(r.NR); })
      .def_property_readonly("Lambda0", [](const ResonanceStructure& r) { return names(r.Lambda0); })
      .def_property_readonly("thresholds",
                             [](const ResonanceStructure& r) {
                               std::vector<double> out;
                               for (const auto& g : r.groups) out.push_back(g.r);
                               return out;
                             })
      .def_property_readonly("H6", [](const ResonanceStructure& r) { return hypothesis(r.H6); })
      .def("to_json", &ResonanceStructure::to_json);
  m.def("classify", &classify, py::arg("lambdas"), py::arg("omega"), py::arg("tau") = 1e-9);

  py::class_<RefinedProfile>(m, "RefinedProfile")
      .def_readonly("omega", &RefinedProfile::omega)
      .def_readonly("max_residual", &RefinedProfile::max_residual)
      .def_readonly("max_orth", &RefinedProfile::max_orth)
      .def_property_readonly("sources",
                             [](const RefinedProfile& rp) {
                               py::list out;
                               for (const auto& s : rp.sources)
                                 out.append(py::dict(py::arg("m") = s.m.str(), py::arg("r") = s.r, py::arg("G") = s.G,
                                                     py::arg("Gbar") = s.Gbar));
                               return out;
                             })
      .def("manifest_json", &RefinedProfile::manifest_json);

  m.def(
      "refined_profile",
      [](const Nonlinearity& nl, double omega, const RadialGrid& g) {
        auto gs = solve_ground_state(nl, omega, g);
        auto op = build_operators(gs, nl, g);
        auto sp = discrete_spectrum(op);
        auto rs = classify(sp.report.lambdas, omega, 1e-9 * omega);
        return std::make_pair(build_refined_profile(gs, nl, op, sp.modes, rs), op);
      },
      py::arg("nl"), py::arg("omega"), py::arg("grid"));

  m.def(
      "fgr_gram",
      [](const RefinedProfile& rp, const Operators& op, int k) {
        auto g = fgr_gram(rp, op, k);
        py::dict d;
        d["r"] = g.r;
        d["gamma"] = g.gamma;
        d["gamma_farfield"] = g.gamma_ff;
        d["min_eig"] = g.min_eig;
        d["route_error"] = g.route_error;
        d["status"] = status_name(g.status);
        return d;
      },
      py::arg("profile"), py::arg("op"), py::arg("group") = 0);

  m.def(
      "simulate",
      [](const RefinedProfile& rp, double dt, double T, int stride, bool sponge, double amplitude, int mode) {
        SimConfig c;
        c.grid = rp.grid;
        c.nl = rp.nl;
        c.dt = dt;
        c.T = T;
        c.stride = stride;
        c.sponge.on = sponge;
        c.init.mode = mode;
        c.init.amplitude = amplitude;
        auto ts = run(c, rp);
        py::dict d;
        d["t"] = ts.t;
        d["theta"] = ts.theta;
        d["varpi"] = ts.varpi;
        d["z"] = ts.z;
        d["Q0"] = ts.Q0;
        d["E"] = ts.E;
        d["q0_drift"] = ts.q0_drift;
        return d;
      },
      py::arg("profile"), py::arg("dt"), py::arg("T"), py::arg("stride") = 10, py::arg("sponge") = true,
      py::arg("amplitude") = 0.0, py::arg("mode") = -1);

  m.def(
      "cache_key", [](const std::string& json_text) { return cache_key(nlohmann::json::parse(json_text)); },
      py::arg("json_text"));
  m.def("run_pipeline", py::overload_cast<const std::string&>(&run_pipeline), py::arg("config_path"));
  m.def("summarize_report", &summarize_report, py::arg("dir"));
}
