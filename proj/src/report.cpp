#include "flexarm/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "flexarm/analysis.hpp"
#include "flexarm/errors.hpp"

namespace flexarm {

namespace {

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

std::string fmt_vec(const Vec2& v) {
  std::ostringstream os;
  os << std::setprecision(6) << "(" << v(0) << ", " << v(1) << ")";
  return os.str();
}

void print_matrix(std::ostream& os, const std::string& title, const MatX& m) {
  const Eigen::IOFormat f(6, 0, " ", "\n", "    [", "]");
  os << "  " << title << " (" << m.rows() << "x" << m.cols() << "):\n" << m.format(f) << "\n";
}

void check_line(std::ostream& os, const std::string& name, const char* result, const std::string& key, double value) {
  os << "check " << std::left << std::setw(44) << name << std::right << ' ' << result << "  " << key << '=' << value
     << '\n';
}

void gain_section(std::ostream& os, const GainCertificate& cert) {
  for (const auto& c : cert.checks) check_line(os, c.name, verdict(c.pass), "min_eig", c.min_eigenvalue);
  os << "gain_certificate " << verdict(cert.pass) << "  margin=" << cert.margin << '\n';
}

}  // namespace

std::string analysis_report(const Scenario& s, const bool matrices) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "scenario " << s.name << "  controller=" << controller_kind(s.controller) << "  q_star=" << fmt_vec(s.q_star)
     << '\n';
  const PlantParams& p = s.plant;
  GainCertificate cert;
  try {
    cert = validate_gains(p, s.controller);
  } catch (const GainError& e) {
    os << "gain_certificate FAIL  " << e.what() << '\n';
    return os.str();
  }

  if (const auto* g = std::get_if<PiGains>(&s.controller)) {
    gain_section(os, cert);
    os << "schur_block diag=" << fmt_vec(cert.schur_block.diagonal()) << '\n';
    const StructureMatrices st = pi_structure(p, *g);
    check_line(os, "sym(F_PI) <= 0", verdict(st.dissipative()), "max_eig", st.max_sym_eigenvalue);
    const HessianCertificate h = hessian_pi_at_equilibrium(p, *g);
    check_line(os, "Hessian(H_PI) at x* > 0", verdict(h.pass), "min_eig", h.min_eigenvalue);
    os << "saturation_bound unbounded\n";
    if (matrices) {
      print_matrix(os, "F_PI", st.F);
      print_matrix(os, "Hessian H_PI", h.hessian);
    }
    return os.str();
  }

  const SatGains* sat = std::get_if<SatGains>(&s.controller);
  if (const auto* gi = std::get_if<IntGains>(&s.controller)) sat = &gi->sat;
  if (sat == nullptr) {
    os << "open loop: no gain conditions; H is non-increasing under u = 0\n";
    return os.str();
  }

  gain_section(os, cert);
  os << "schur_block diag=" << fmt_vec(cert.schur_block.diagonal()) << '\n';
  const StructureMatrices st = zeta_structure(p, *sat);
  check_line(os, "sym(F_zeta) <= 0", verdict(st.dissipative()), "max_eig", st.max_sym_eigenvalue);
  const HessianCertificate h = hessian_zeta_at_equilibrium(p, *sat);
  check_line(os, "Hessian(H_zeta) at zeta* > 0", verdict(h.pass), "min_eig", h.min_eigenvalue);
  std::optional<LinearizationMatrix> lin;
  if (const auto* gi = std::get_if<IntGains>(&s.controller)) {
    if (cert.pass) {
      lin = linearization_matrix(p, *gi);
      const HurwitzCertificate hw = is_hurwitz(lin->A);
      check_line(os, "linearization Hurwitz", verdict(hw.pass), "spectral_abscissa", hw.spectral_abscissa);
    } else {
      os << "check " << std::left << std::setw(44) << "linearization Hurwitz" << std::right
         << " SKIP  (saturated gains fail)\n";
    }
  }
  const Vec2 bound = saturation_bound(s.controller);
  const auto warnings = check_actuator_budget(p, s.controller, false);
  os << "saturation_bound " << fmt_vec(bound) << "  u_max=" << p.u_max << "  " << (warnings.empty() ? "OK" : "EXCEEDS")
     << '\n';
  if (matrices) {
    print_matrix(os, "F_zeta", st.F);
    print_matrix(os, "Hessian H_zeta", h.hessian);
    if (lin) print_matrix(os, "linearization A", lin->A);
  }
  return os.str();
}

std::string run_summary(const Scenario& s, const GainCertificate& cert, const Trajectory& traj, const Metrics& m) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "scenario " << s.name << " (" << controller_kind(s.controller) << ", actuator " << s.actuator.describe()
     << ")\n";
  os << "  horizon            " << s.sim.t_final << " s, dt " << s.sim.dt << " s, " << traj.size() << " samples\n";
  os << "  gain certificate   " << verdict(cert.pass) << " (margin " << cert.margin << ")\n";
  os << "  steady-state error " << fmt_vec(m.steady_state_error) << " rad\n";
  os << "  max |u|            " << fmt_vec(m.max_abs_u) << '\n';
  os << "  settle time        " << m.settle_time << " s\n";
  os << "  energy upticks     " << m.energy_violations << '\n';
  if (traj.diverged()) os << "  DIVERGED at t = " << *traj.divergence_time << " s\n";

  os << std::setprecision(17);
  os << "# machine-readable\n";
  os << "scenario=" << s.name << '\n';
  os << "certificate_pass=" << (cert.pass ? 1 : 0) << '\n';
  os << "certificate_margin=" << cert.margin << '\n';
  os << "steady_state_error_1=" << m.steady_state_error(0) << '\n';
  os << "steady_state_error_2=" << m.steady_state_error(1) << '\n';
  os << "max_abs_u_1=" << m.max_abs_u(0) << '\n';
  os << "max_abs_u_2=" << m.max_abs_u(1) << '\n';
  os << "settle_time=" << m.settle_time << '\n';
  os << "energy_violations=" << m.energy_violations << '\n';
  os << "diverged=" << (traj.diverged() ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace flexarm
