#include "flexarm/controllers.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "flexarm/errors.hpp"

namespace flexarm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_symmetric(const Mat2& m, const char* name) {
  if (!is_symmetric(m)) throw GainError(std::string("gain matrix ") + name + " is not symmetric");
}

void require_finite(const Vec2& v, const char* name) {
  if (!v.allFinite()) throw GainError(std::string(name) + " has non-finite entries");
}

MatrixCheck positive_definite(std::string name, const Mat2& m) {
  MatrixCheck c{std::move(name), min_eigenvalue(m), false};
  c.pass = c.min_eigenvalue > kDefiniteTol;
  return c;
}

GainCertificate collect(std::vector<MatrixCheck> checks, const Mat2& schur_block) {
  GainCertificate cert;
  cert.pass = true;
  cert.margin = checks.front().min_eigenvalue;
  for (const auto& c : checks) {
    cert.pass = cert.pass && c.pass;
    cert.margin = std::min(cert.margin, c.min_eigenvalue);
  }
  cert.checks = std::move(checks);
  cert.schur_block = schur_block;
  return cert;
}

void require_slopes(const Vec2& alpha, const Vec2& beta, const char* which) {
  require_finite(alpha, which);
  require_finite(beta, which);
  if ((alpha.array() < 0.0).any()) throw GainError(std::string("alpha_") + which + " must be non-negative");
  if ((beta.array() <= 0.0).any()) throw GainError(std::string("beta_") + which + " must be positive");
}

// ln cosh(x) without overflow for large |x|.
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

int controller_state_dim(const ControllerSpec& spec) {
  return std::visit(overloaded{[](const OpenLoop&) { return 0; }, [](const PiGains&) { return 0; },
                               [](const SatGains&) { return 4; }, [](const IntGains&) { return 6; }},
                    spec);
}

int closed_loop_dim(const ControllerSpec& spec) { return 8 + controller_state_dim(spec); }

std::string controller_kind(const ControllerSpec& spec) {
  return std::visit(overloaded{[](const OpenLoop&) { return "open_loop"; }, [](const PiGains&) { return "pi"; },
                               [](const SatGains&) { return "saturated"; },
                               [](const IntGains&) { return "saturated_integral"; }},
                    spec);
}

Vec2 reference(const ControllerSpec& spec) {
  return std::visit(overloaded{[](const OpenLoop&) -> Vec2 { return Vec2::Zero(); },
                               [](const PiGains& g) -> Vec2 { return g.q_star; },
                               [](const SatGains& g) -> Vec2 { return g.q_star; },
                               [](const IntGains& g) -> Vec2 { return g.sat.q_star; }},
                    spec);
}

void set_reference(ControllerSpec& spec, const Vec2& q_star) {
  std::visit(overloaded{[](OpenLoop&) {}, [&](PiGains& g) { g.q_star = q_star; },
                        [&](SatGains& g) { g.q_star = q_star; }, [&](IntGains& g) { g.sat.q_star = q_star; }},
             spec);
}

std::string GainCertificate::failed_checks() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : checks) {
    if (c.pass) continue;
    os << (first ? "" : "; ") << c.name << " (min eigenvalue " << c.min_eigenvalue << ")";
    first = false;
  }
  return os.str();
}

GainCertificate validate_pi_gains(const PlantParams& params, const PiGains& g) {
  require_symmetric(g.K_Pm, "K_Pm");
  require_symmetric(g.K_I, "K_I");
  if (!g.K_Pl.allFinite()) throw GainError("gain matrix K_Pl has non-finite entries");
  const Mat2 dl_inv = params.link_damping().inverse();
  const Mat2 coupling = params.motor_damping() + g.K_Pm - 0.25 * g.K_Pl.transpose() * dl_inv * g.K_Pl;
  return collect({positive_definite("K_Pm > 0", g.K_Pm), positive_definite("K_I > 0", g.K_I),
                  positive_definite("D_m + K_Pm - K_Pl^T D_l^-1 K_Pl / 4 > 0", coupling)},
                 coupling);
}

GainCertificate validate_sat_gains(const PlantParams& params, const SatGains& g) {
  require_symmetric(g.R_cl, "R_cl");
  require_symmetric(g.R_cm, "R_cm");
  require_symmetric(g.K_c, "K_c");
  require_slopes(g.alpha_l, g.beta_l, "l");
  require_slopes(g.alpha_m, g.beta_m, "m");
  require_finite(g.q_star, "q_star");
  const Mat2 schur = g.R_cl - 0.25 * (params.link_damping().inverse() + params.motor_damping().inverse());
  return collect({positive_definite("R_cl - (D_l^-1 + D_m^-1) / 4 > 0", schur), positive_definite("R_cl > 0", g.R_cl),
                  positive_definite("R_cm > 0", g.R_cm), positive_definite("K_c > 0", g.K_c)},
                 schur);
}

GainCertificate validate_int_gains(const PlantParams& params, const IntGains& g) {
  GainCertificate cert = validate_sat_gains(params, g.sat);
  require_finite(g.alpha_sigma, "alpha_sigma");
  require_finite(g.beta_sigma, "beta_sigma");
  if ((g.alpha_sigma.array() <= 0.0).any()) throw GainError("alpha_sigma must be positive");
  if ((g.beta_sigma.array() <= 0.0).any()) throw GainError("beta_sigma must be positive");
  if (g.K_sigma(0, 1) != 0.0 || g.K_sigma(1, 0) != 0.0) throw GainError("K_sigma must be diagonal");
  MatrixCheck k{"K_sigma diagonal > 0", g.K_sigma.diagonal().minCoeff(), false};
  k.pass = k.min_eigenvalue > kDefiniteTol;
  cert.pass = cert.pass && k.pass;
  cert.margin = std::min(cert.margin, k.min_eigenvalue);
  cert.checks.push_back(k);
  return cert;
}

GainCertificate validate_gains(const PlantParams& params, const ControllerSpec& spec) {
  return std::visit(
      overloaded{[](const OpenLoop&) {
                   GainCertificate c;
                   c.pass = true;
                   return c;
                 },
                 [&](const PiGains& g) { return validate_pi_gains(params, g); },
                 [&](const SatGains& g) { return validate_sat_gains(params, g); },
                 [&](const IntGains& g) { return validate_int_gains(params, g); }},
      spec);
}

double sat_potential(const Vec2& alpha, const Vec2& beta, const Vec2& z) {
  double phi = 0.0;
  for (int i = 0; i < 2; ++i) phi += alpha(i) / beta(i) * log_cosh(beta(i) * z(i));
  return phi;
}

Vec2 sat_potential_grad(const Vec2& alpha, const Vec2& beta, const Vec2& z) {
  return {alpha(0) * std::tanh(beta(0) * z(0)), alpha(1) * std::tanh(beta(1) * z(1))};
}

Vec2 sat_potential_hessian(const Vec2& alpha, const Vec2& beta, const Vec2& z) {
  Vec2 h;
  for (int i = 0; i < 2; ++i) {
    const double sech = 1.0 / std::cosh(beta(i) * z(i));
    h(i) = alpha(i) * beta(i) * sech * sech;
  }
  return h;
}

Vec2 link_error(const SatGains& g, const Vec4& q, const SatState& cs) { return q.head<2>() - g.q_star + cs.x_cl; }

Vec2 motor_error(const SatGains& g, const Vec4& q, const SatState& cs) { return q.tail<2>() - g.q_star + cs.x_cm; }

Vec2 pi_control(const PlantParams& params, const PiGains& g, const PlantState& x) {
  const Vec4 v = velocities(params, x);
  return -g.K_Pm * v.tail<2>() - g.K_I * (x.q_m - g.q_star) - g.K_Pl * v.head<2>();
}

Vec2 sat_control(const SatGains& g, const Vec4& q, const SatState& cs) {
  return -sat_potential_grad(g.alpha_l, g.beta_l, link_error(g, q, cs)) -
         sat_potential_grad(g.alpha_m, g.beta_m, motor_error(g, q, cs));
}

SatStateRate sat_controller_dynamics(const SatGains& g, const Vec4& q, const SatState& cs) {
  // dz/dx_c = I, so the x_c gradients of Phi equal the z gradients.
  const Vec2 grad_l = sat_potential_grad(g.alpha_l, g.beta_l, link_error(g, q, cs));
  const Vec2 grad_m = sat_potential_grad(g.alpha_m, g.beta_m, motor_error(g, q, cs));
  return {-g.R_cl * grad_l, -g.R_cm * (grad_m + g.K_c * cs.x_cm)};
}

Vec2 int_control(const IntGains& g, const Vec4& q, const IntState& cs) {
  return sat_control(g.sat, q, cs.sat) - sat_potential_grad(g.alpha_sigma, g.beta_sigma, cs.sigma);
}

IntStateRate int_controller_dynamics(const IntGains& g, const Vec4& q, const IntState& cs) {
  const Vec2 hess = sat_potential_hessian(g.alpha_sigma, g.beta_sigma, cs.sigma);
  const Vec2 motor_offset = q.tail<2>() - g.sat.q_star;
  return {sat_controller_dynamics(g.sat, q, cs.sat), hess.cwiseProduct(motor_offset) - g.K_sigma * cs.sigma};
}

Vec2 saturation_bound(const ControllerSpec& spec) {
  return std::visit(overloaded{[](const OpenLoop&) -> Vec2 { return Vec2::Zero(); },
                               [](const PiGains&) -> Vec2 {
                                 throw UnboundedControlError("unbounded control law: the PI controller is not saturated");
                               },
                               [](const SatGains& g) -> Vec2 { return g.alpha_l + g.alpha_m; },
                               [](const IntGains& g) -> Vec2 { return g.sat.alpha_l + g.sat.alpha_m + g.alpha_sigma; }},
                    spec);
}

std::vector<std::string> check_actuator_budget(const PlantParams& params, const ControllerSpec& spec, bool strict) {
  std::vector<std::string> warnings;
  if (std::holds_alternative<PiGains>(spec)) {
    warnings.push_back("PI law is unbounded; actuator limit u_max is not enforced by the controller");
    if (strict) throw GainError(warnings.back());
    return warnings;
  }
  const Vec2 bound = saturation_bound(spec);
  for (int i = 0; i < 2; ++i) {
    // Sums like 0.8 + 0.4 land one ulp above 1.2.
    if (bound(i) > params.u_max * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "channel " << i + 1 << ": saturation bound " << bound(i) << " exceeds u_max " << params.u_max;
      warnings.push_back(os.str());
      if (strict) throw GainError(warnings.back());
    }
  }
  return warnings;
}

}  // namespace flexarm
