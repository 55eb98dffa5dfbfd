#pragma once

#include "flexarm/linalg.hpp"

namespace flexarm {

/// Physical constants of the two-link flexible-joint arm. Defaults are the
/// Quanser 2-DOF serial flexible joint values.
struct PlantParams {
  double a1 = 0.148;  // [kg m^2]
  double a2 = 0.073;
  double b = 0.086;
  double Im1 = 0.217;  // motor inertias [kg m^2]
  double Im2 = 0.007;
  double Dl1 = 0.038;  // viscous damping [N m s / rad]
  double Dl2 = 0.03;
  double Dm1 = 8.435;
  double Dm2 = 0.136;
  double ks1 = 9.0;  // joint stiffness [N m / rad]
  double ks2 = 4.0;
  double u_max = 1.2;  // per-channel actuator limit

  static PlantParams quanser() { return {}; }

  Mat2 motor_inertia() const;
  Mat2 link_damping() const;
  Mat2 motor_damping() const;
  Mat2 stiffness() const;

  /// Throws ConfigError unless every constant is positive and a1*a2 > b^2.
  void validate() const;

  bool operator==(const PlantParams&) const = default;
};

/// Positions and momenta, ordered (q_l, q_m, p_l, p_m) when flattened.
struct PlantState {
  Vec2 q_l = Vec2::Zero();
  Vec2 q_m = Vec2::Zero();
  Vec2 p_l = Vec2::Zero();
  Vec2 p_m = Vec2::Zero();

  Vec4 q() const;
  Vec4 p() const;
  Vec8 to_vector() const;
  /// Reads the first eight entries of a (closed-loop) state vector.
  static PlantState from_vector(const Eigen::Ref<const VecX>& v);
  bool is_finite() const;
};

Mat2 link_mass_matrix(const PlantParams& params, double q_l2);
/// Closed-form 2x2 inverse; the determinant a1*a2 - b^2 cos^2 is bounded below by a1*a2 - b^2.
Mat2 link_mass_matrix_inverse(const PlantParams& params, double q_l2);
Mat2 link_mass_matrix_derivative(const PlantParams& params, double q_l2);

/// M(q_l2) = diag(M_l(q_l2), M_m).
Mat4 mass_matrix(const PlantParams& params, double q_l2);
/// dM/dq_l2; only the link block is non-zero.
Mat4 mass_matrix_derivative(const PlantParams& params, double q_l2);

/// Velocities M^{-1}(q_l2) p, i.e. the momentum gradient of H.
Vec4 velocities(const PlantParams& params, const PlantState& x);

/// H = 1/2 p^T M^{-1} p + 1/2 |q_l - q_m|^2_{K_s}
double hamiltonian(const PlantParams& params, const PlantState& x);

struct HamiltonianGradient {
  Vec4 dq;
  Vec4 dp;
  Vec8 stacked() const;
};

HamiltonianGradient grad_hamiltonian(const PlantParams& params, const PlantState& x);

/// q' = dH/dp, p' = -dH/dq - R_2 dH/dp + B u with B = [0; I_2].
Vec8 open_loop_dynamics(const PlantParams& params, const PlantState& x, const Vec2& u);

}  // namespace flexarm
