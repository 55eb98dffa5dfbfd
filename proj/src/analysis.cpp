#include "flexarm/analysis.hpp"

#include "flexarm/errors.hpp"

namespace flexarm {

namespace {

void require_certificate(const GainCertificate& cert, const char* what) {
  if (!cert.pass) throw CertificateError(std::string(what) + " gain certificate failed: " + cert.failed_checks());
}

StructureMatrices finish_structure(MatX f) {
  StructureMatrices s;
  s.sym_F = sym(f);
  s.max_sym_eigenvalue = max_eigenvalue(s.sym_F);
  s.F = std::move(f);
  return s;
}

HessianCertificate certify_hessian(MatX h) {
  HessianCertificate c;
  c.min_eigenvalue = min_eigenvalue(h);
  c.pass = c.min_eigenvalue > kDefiniteTol;
  c.hessian = std::move(h);
  return c;
}

Mat4 stiffness_block(const PlantParams& params) {
  const Mat2 ks = params.stiffness();
  Mat4 k;
  k << ks, -ks, -ks, ks;
  return k;
}

}  // namespace

double shaped_hamiltonian_pi(const PlantParams& params, const PiGains& g, const PlantState& x) {
  const Vec2 e = x.q_m - g.q_star;
  return hamiltonian(params, x) + 0.5 * e.dot(g.K_I * e);
}

Vec8 grad_shaped_hamiltonian_pi(const PlantParams& params, const PiGains& g, const PlantState& x) {
  Vec8 grad = grad_hamiltonian(params, x).stacked();
  grad.segment<2>(2) += g.K_I * (x.q_m - g.q_star);
  return grad;
}

Mat4 pi_dissipation(const PlantParams& params, const PiGains& g) {
  Mat4 r;
  r << params.link_damping(), 0.5 * g.K_Pl.transpose(), 0.5 * g.K_Pl, params.motor_damping() + g.K_Pm;
  return r;
}

StructureMatrices pi_structure(const PlantParams& params, const PiGains& g) {
  Mat4 j = Mat4::Zero();
  j.topRightCorner<2, 2>() = 0.5 * g.K_Pl.transpose();
  j.bottomLeftCorner<2, 2>() = -0.5 * g.K_Pl;
  MatX f = MatX::Zero(8, 8);
  f.topRightCorner(4, 4) = Mat4::Identity();
  f.bottomLeftCorner(4, 4) = -Mat4::Identity();
  f.bottomRightCorner(4, 4) = j - pi_dissipation(params, g);
  return finish_structure(std::move(f));
}

Vec8 pi_closed_loop_field(const PlantParams& params, const PiGains& g, const PlantState& x) {
  require_certificate(validate_pi_gains(params, g), "PI");
  return open_loop_dynamics(params, x, pi_control(params, g, x));
}

Vec8 structured_pi_field(const PlantParams& params, const PiGains& g, const PlantState& x) {
  require_certificate(validate_pi_gains(params, g), "PI");
  return pi_structure(params, g).F * grad_shaped_hamiltonian_pi(params, g, x);
}

HessianCertificate hessian_pi_at_equilibrium(const PlantParams& params, const PiGains& g) {
  MatX h = MatX::Zero(8, 8);
  Mat4 k = stiffness_block(params);
  k.bottomRightCorner<2, 2>() += g.K_I;
  h.topLeftCorner(4, 4) = k;
  // Second derivative of 1/2 p^T M^{-1} p at p = 0 is M^{-1}, not M.
  h.bottomRightCorner(4, 4) = mass_matrix(params, g.q_star(1)).inverse();
  return certify_hessian(std::move(h));
}

Vec12 zeta_vector(const PlantState& x, const SatState& cs) {
  return (Vec12() << x.to_vector(), cs.x_cl, cs.x_cm).finished();
}

void split_zeta(const Eigen::Ref<const VecX>& zeta, PlantState& x, SatState& cs) {
  x = PlantState::from_vector(zeta);
  cs.x_cl = zeta.segment<2>(8);
  cs.x_cm = zeta.segment<2>(10);
}

double shaped_hamiltonian_zeta(const PlantParams& params, const SatGains& g, const PlantState& x,
                               const SatState& cs) {
  const Vec4 q = x.q();
  return hamiltonian(params, x) + sat_potential(g.alpha_l, g.beta_l, link_error(g, q, cs)) +
         sat_potential(g.alpha_m, g.beta_m, motor_error(g, q, cs)) + 0.5 * cs.x_cm.dot(g.K_c * cs.x_cm);
}

Vec12 grad_shaped_hamiltonian_zeta(const PlantParams& params, const SatGains& g, const PlantState& x,
                                   const SatState& cs) {
  const Vec4 q = x.q();
  const Vec2 grad_l = sat_potential_grad(g.alpha_l, g.beta_l, link_error(g, q, cs));
  const Vec2 grad_m = sat_potential_grad(g.alpha_m, g.beta_m, motor_error(g, q, cs));
  Vec12 grad;
  grad.head<8>() = grad_hamiltonian(params, x).stacked();
  grad.segment<2>(0) += grad_l;
  grad.segment<2>(2) += grad_m;
  grad.segment<2>(8) = grad_l;
  grad.segment<2>(10) = grad_m + g.K_c * cs.x_cm;
  return grad;
}

StructureMatrices zeta_structure(const PlantParams& params, const SatGains& g) {
  MatX f = MatX::Zero(12, 12);
  f.block(0, 4, 4, 4) = Mat4::Identity();
  f.block(4, 0, 4, 4) = -Mat4::Identity();
  f.block(4, 4, 2, 2) = -params.link_damping();
  f.block(6, 6, 2, 2) = -params.motor_damping();
  f.block(4, 8, 2, 2) = Mat2::Identity();
  f.block(6, 8, 2, 2) = -Mat2::Identity();
  f.block(8, 8, 2, 2) = -g.R_cl;
  f.block(10, 10, 2, 2) = -g.R_cm;
  return finish_structure(std::move(f));
}

Vec12 zeta_closed_loop_field(const PlantParams& params, const SatGains& g, const Vec12& zeta) {
  require_certificate(validate_sat_gains(params, g), "saturated");
  PlantState x;
  SatState cs;
  split_zeta(zeta, x, cs);
  const Vec4 q = x.q();
  const SatStateRate rate = sat_controller_dynamics(g, q, cs);
  Vec12 dz;
  dz.head<8>() = open_loop_dynamics(params, x, sat_control(g, q, cs));
  dz.segment<2>(8) = rate.x_cl;
  dz.segment<2>(10) = rate.x_cm;
  return dz;
}

Vec12 f_zeta_times_grad(const PlantParams& params, const SatGains& g, const Vec12& zeta) {
  require_certificate(validate_sat_gains(params, g), "saturated");
  PlantState x;
  SatState cs;
  split_zeta(zeta, x, cs);
  return zeta_structure(params, g).F * grad_shaped_hamiltonian_zeta(params, g, x, cs);
}

HessianCertificate hessian_zeta_at_equilibrium(const PlantParams& params, const SatGains& g) {
  Vec4 shaping_diag;
  shaping_diag << g.beta_l.cwiseProduct(g.alpha_l), g.beta_m.cwiseProduct(g.alpha_m);
  const Mat4 shaping = shaping_diag.asDiagonal();
  Mat4 kc = Mat4::Zero();
  kc.bottomRightCorner<2, 2>() = g.K_c;
  MatX h = MatX::Zero(12, 12);
  h.block(0, 0, 4, 4) = stiffness_block(params) + shaping;
  h.block(0, 8, 4, 4) = shaping;
  h.block(8, 0, 4, 4) = shaping;
  h.block(8, 8, 4, 4) = shaping + kc;
  h.block(4, 4, 4, 4) = mass_matrix(params, g.q_star(1)).inverse();
  return certify_hessian(std::move(h));
}

LinearizationMatrix linearization_matrix(const PlantParams& params, const IntGains& g) {
  require_certificate(validate_sat_gains(params, g.sat), "saturated");
  LinearizationMatrix lin;
  lin.A_sigma = g.beta_sigma.cwiseProduct(g.alpha_sigma).asDiagonal();
  lin.A_xi1 = MatX::Zero(12, 2);
  lin.A_xi1.block(6, 0, 2, 2) = -lin.A_sigma;
  lin.A_xi2 = MatX::Zero(12, 2);
  lin.A_xi2.block(2, 0, 2, 2) = lin.A_sigma;
  lin.A = MatX::Zero(14, 14);
  lin.A.topLeftCorner(12, 12) = zeta_structure(params, g.sat).F * hessian_zeta_at_equilibrium(params, g.sat).hessian;
  lin.A.topRightCorner(12, 2) = lin.A_xi1;
  lin.A.bottomLeftCorner(2, 12) = lin.A_xi2.transpose();
  lin.A.bottomRightCorner(2, 2) = -g.K_sigma;
  return lin;
}

HurwitzCertificate is_hurwitz(const MatX& a) {
  require_square(a, "is_hurwitz");
  HurwitzCertificate c;
  c.eigenvalues = general_eigenvalues(a);
  c.spectral_abscissa = c.eigenvalues.real().maxCoeff();
  c.pass = c.spectral_abscissa < -kHurwitzTol;
  return c;
}

}  // namespace flexarm
