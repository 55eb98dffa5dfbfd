#pragma once

#include "flexarm/controllers.hpp"
#include "flexarm/linalg.hpp"
#include "flexarm/plant.hpp"

// State ordering for every assembled matrix and augmented vector:
//   (q_l, q_m, p_l, p_m, x_cl, x_cm, sigma)
// PI loop uses the first 8 entries, the saturated loop 12, the integral loop 14.

namespace flexarm {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

/// Interconnection-minus-dissipation matrix F of a closed loop x' = F grad H_d.
struct StructureMatrices {
  MatX F;
  MatX sym_F;
  double max_sym_eigenvalue = 0.0;
  /// sym_F <= 0 up to kDefiniteTol.
  bool dissipative() const { return max_sym_eigenvalue <= kDefiniteTol; }
};

struct HessianCertificate {
  MatX hessian;
  double min_eigenvalue = 0.0;
  bool pass = false;
};

struct HurwitzCertificate {
  bool pass = false;
  double spectral_abscissa = 0.0;
  Eigen::VectorXcd eigenvalues;
};

struct LinearizationMatrix {
  MatX A;        // 14x14
  Mat2 A_sigma;  // diag(beta_sigma_i alpha_sigma_i)
  MatX A_xi1;    // 12x2, -A_sigma in the p_m rows
  MatX A_xi2;    // 12x2, A_sigma in the q_m rows
};

/// Real-part threshold for the Hurwitz test.
inline constexpr double kHurwitzTol = 1e-9;

// ---- PI loop ----------------------------------------------------------------

/// H_PI = H + 1/2 |q_m - q*|^2_{K_I}
double shaped_hamiltonian_pi(const PlantParams& params, const PiGains& g, const PlantState& x);
Vec8 grad_shaped_hamiltonian_pi(const PlantParams& params, const PiGains& g, const PlantState& x);

/// F = [0 I; -I, J_PI2 - R_PI2] with J_PI2 - R_PI2 = [-D_l 0; -K_Pl, -D_m - K_Pm].
StructureMatrices pi_structure(const PlantParams& params, const PiGains& g);
/// The symmetric dissipation block R_PI2 = [D_l, K_Pl^T/2; K_Pl/2, D_m + K_Pm].
Mat4 pi_dissipation(const PlantParams& params, const PiGains& g);

/// Plant field with the PI law substituted. Throws CertificateError if the gains fail.
Vec8 pi_closed_loop_field(const PlantParams& params, const PiGains& g, const PlantState& x);
/// The same field computed as F grad H_PI.
Vec8 structured_pi_field(const PlantParams& params, const PiGains& g, const PlantState& x);

/// [K_PI 0; 0 M(q*_2)^{-1}] with K_PI = [K_s, -K_s; -K_s, K_s + K_I].
HessianCertificate hessian_pi_at_equilibrium(const PlantParams& params, const PiGains& g);

// ---- saturated (zeta) loop ----------------------------------------------------

Vec12 zeta_vector(const PlantState& x, const SatState& cs);
void split_zeta(const Eigen::Ref<const VecX>& zeta, PlantState& x, SatState& cs);

/// H_zeta = H + Phi_l(z_l) + Phi_m(z_m) + 1/2 |x_cm|^2_{K_c}
double shaped_hamiltonian_zeta(const PlantParams& params, const SatGains& g, const PlantState& x, const SatState& cs);
Vec12 grad_shaped_hamiltonian_zeta(const PlantParams& params, const SatGains& g, const PlantState& x,
                                   const SatState& cs);

/// F_zeta; Gamma = [I; -I] couples the x_cl gradient into (p_l, p_m).
StructureMatrices zeta_structure(const PlantParams& params, const SatGains& g);

/// Plant + controller-state dynamics by substitution. Throws CertificateError if the gains fail.
Vec12 zeta_closed_loop_field(const PlantParams& params, const SatGains& g, const Vec12& zeta);
/// F_zeta grad H_zeta.
Vec12 f_zeta_times_grad(const PlantParams& params, const SatGains& g, const Vec12& zeta);

/// Block Hessian [K_S + A, 0, A; 0, M*^{-1}, 0; A, 0, A + K_C] at zeta_*,
/// A = diag(beta_l alpha_l, beta_m alpha_m).
HessianCertificate hessian_zeta_at_equilibrium(const PlantParams& params, const SatGains& g);

// ---- integral loop ------------------------------------------------------------

/// [F_zeta H_zeta*, A_xi1; A_xi2^T, -K_sigma]. Throws CertificateError if g.sat fails.
LinearizationMatrix linearization_matrix(const PlantParams& params, const IntGains& g);

/// Passes iff every eigenvalue has real part < -1e-9. Throws on non-square input.
HurwitzCertificate is_hurwitz(const MatX& a);

}  // namespace flexarm
