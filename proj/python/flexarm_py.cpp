#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "flexarm/analysis.hpp"
#include "flexarm/errors.hpp"
#include "flexarm/report.hpp"
#include "flexarm/scenario.hpp"
#include "flexarm/sim.hpp"

namespace py = pybind11;
using namespace flexarm;

namespace {

PlantState state_from(const VecX& x) {
  if (x.size() != 8) throw std::invalid_argument("plant state must have 8 entries (q_l, q_m, p_l, p_m)");
  return PlantState::from_vector(x);
}

VecX column(const std::vector<double>& v) {
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
MatX stack(const std::vector<T>& rows, Eigen::Index cols) {
  MatX m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t k = 0; k < rows.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
  return m;
}

py::dict certificate_dict(const GainCertificate& c) {
  py::list checks;
  for (const auto& m : c.checks) checks.append(py::make_tuple(m.name, m.min_eigenvalue, m.pass));
  py::dict d;
  d["pass"] = c.pass;
  d["margin"] = c.margin;
  d["checks"] = checks;
  d["schur_block"] = MatX(c.schur_block);
  return d;
}

py::dict hessian_dict(const HessianCertificate& h) {
  py::dict d;
  d["hessian"] = h.hessian;
  d["min_eigenvalue"] = h.min_eigenvalue;
  d["pass"] = h.pass;
  return d;
}

py::dict simulate_py(const std::string& ref, std::optional<double> t_final, std::optional<double> dt,
                     const std::string& actuator, std::optional<int> record_stride, bool override_certificates) {
  Scenario s = resolve_scenario(ref);
  s.actuator = parse_actuator(actuator, s.plant.u_max);
  if (t_final) s.sim.t_final = *t_final;
  if (dt) s.sim.dt = *dt;
  if (record_stride) s.sim.record_stride = *record_stride;
  s.validate();

  Trajectory tr;
  {
    py::gil_scoped_release release;
    tr = simulate(s.plant, s.controller, s.actuator, s.x0, s.sim, override_certificates);
  }
  const Metrics m = compute_metrics(tr, s.q_star);

  py::dict metrics;
  metrics["steady_state_error"] = VecX(m.steady_state_error);
  metrics["max_abs_u"] = VecX(m.max_abs_u);
  metrics["settle_time"] = m.settle_time;
  metrics["energy_violations"] = m.energy_violations;

  py::dict d;
  d["scenario"] = s.name;
  d["controller"] = tr.controller;
  d["t"] = column(tr.times);
  d["states"] = stack(tr.states, tr.state_dim);
  d["inputs"] = stack(tr.inputs, 2);
  d["commanded"] = stack(tr.commanded, 2);
  d["energy"] = column(tr.energy);
  d["shaped_energy"] = column(tr.shaped_energy);
  d["divergence_time"] = tr.divergence_time ? py::cast(*tr.divergence_time) : py::none();
  d["q_star"] = VecX(s.q_star);
  d["metrics"] = metrics;
  return d;
}

}  // namespace

PYBIND11_MODULE(_flexarm, m) {
  m.doc() = "Flexible-joint arm: port-Hamiltonian model, passivity-based controllers and certificates";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<GainError>(m, "GainError", base.ptr());
  py::register_exception<CertificateError>(m, "CertificateError", base.ptr());
  py::register_exception<UnboundedControlError>(m, "UnboundedControlError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("list_scenarios", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& l : list_scenarios()) out.emplace_back(l.name, l.description);
    return out;
  }, "Built-in scenario names and descriptions.");

  m.def("scenario_json", [](const std::string& ref) { return serialize_scenario(resolve_scenario(ref)); },
        py::arg("scenario"), "Scenario configuration as JSON text (built-in name or file path).");

  m.def("analyze", [](const std::string& ref, bool matrices) {
    return analysis_report(resolve_scenario(ref), matrices);
  }, py::arg("scenario"), py::arg("matrices") = false, "Certificate report, as printed by `flexarm analyze`.");

  m.def("hamiltonian", [](const VecX& x) { return hamiltonian(PlantParams::quanser(), state_from(x)); },
        py::arg("x"), "Open-loop energy H(q, p) for the default plant; x = (q_l, q_m, p_l, p_m).");

  m.def("grad_hamiltonian", [](const VecX& x) {
    return VecX(grad_hamiltonian(PlantParams::quanser(), state_from(x)).stacked());
  }, py::arg("x"), "Gradient of H, ordered like x.");

  m.def("mass_matrix", [](double q_l2) { return MatX(mass_matrix(PlantParams::quanser(), q_l2)); },
        py::arg("q_l2"), "4x4 inertia matrix diag(M_l(q_l2), M_m).");

  m.def("gain_certificate", [](const std::string& ref) {
    const Scenario s = resolve_scenario(ref);
    return certificate_dict(validate_gains(s.plant, s.controller));
  }, py::arg("scenario"), "Gain conditions of the scenario's controller.");

  m.def("hessian_certificate", [](const std::string& ref) {
    const Scenario s = resolve_scenario(ref);
    if (const auto* g = std::get_if<PiGains>(&s.controller)) return hessian_dict(hessian_pi_at_equilibrium(s.plant, *g));
    if (const auto* g = std::get_if<SatGains>(&s.controller)) return hessian_dict(hessian_zeta_at_equilibrium(s.plant, *g));
    if (const auto* g = std::get_if<IntGains>(&s.controller)) {
      return hessian_dict(hessian_zeta_at_equilibrium(s.plant, g->sat));
    }
    throw ConfigError("scenario '" + s.name + "' has no shaped Hamiltonian");
  }, py::arg("scenario"), "Hessian of the shaped Hamiltonian at the target and its PD check.");

  m.def("linearization", [](const std::string& ref) {
    const Scenario s = resolve_scenario(ref);
    const auto* g = std::get_if<IntGains>(&s.controller);
    if (g == nullptr) throw ConfigError("scenario '" + s.name + "' is not a saturated_integral loop");
    return linearization_matrix(s.plant, *g).A;
  }, py::arg("scenario"), "14x14 linearization of the integral loop at its equilibrium.");

  m.def("is_hurwitz", [](const MatX& a) {
    const HurwitzCertificate c = is_hurwitz(a);
    return py::make_tuple(c.pass, c.spectral_abscissa);
  }, py::arg("a"), "(pass, spectral abscissa) with pass iff max Re(lambda) < -1e-9.");

  m.def("saturation_bound", [](const std::string& ref) {
    return VecX(saturation_bound(resolve_scenario(ref).controller));
  }, py::arg("scenario"), "Componentwise bound on |u| for saturated controllers.");

  m.def("simulate", &simulate_py, py::arg("scenario"), py::arg("t_final") = py::none(), py::arg("dt") = py::none(),
        py::arg("actuator") = "ideal", py::arg("record_stride") = py::none(),
        py::arg("override_certificates") = false,
        "Simulate a scenario; returns arrays (t, states, inputs, commanded, energies) and metrics.");
}
