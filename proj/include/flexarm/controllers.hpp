#pragma once

#include <string>
#include <variant>
#include <vector>

#include "flexarm/linalg.hpp"
#include "flexarm/plant.hpp"

namespace flexarm {

/// Velocity-feedback PI law u = -K_Pm q_m' - K_I (q_m - q*) - K_Pl q_l'.
/// Needs momenta, so it is only a baseline.
struct PiGains {
  Mat2 K_Pm = Mat2::Identity();
  Mat2 K_Pl = Mat2::Zero();
  Mat2 K_I = Mat2::Identity();
  Vec2 q_star = Vec2::Zero();

  bool operator==(const PiGains&) const = default;
};

/// Saturated output-feedback law built on log-cosh potentials of
/// z_l = q_l - q* + x_cl and z_m = q_m - q* + x_cm.
struct SatGains {
  Vec2 alpha_l = Vec2::Constant(0.8);
  Vec2 beta_l = Vec2(2.0, 1.0);
  Vec2 alpha_m = Vec2::Constant(0.4);
  Vec2 beta_m = Vec2::Ones();
  Mat2 R_cl = Vec2(10.0, 40.0).asDiagonal();
  Mat2 R_cm = Vec2(25.0, 25.0).asDiagonal();
  Mat2 K_c = Vec2(5.0, 5.0).asDiagonal();
  Vec2 q_star = Vec2::Zero();

  bool operator==(const SatGains&) const = default;
};

struct SatState {
  Vec2 x_cl = Vec2::Zero();
  Vec2 x_cm = Vec2::Zero();

  bool operator==(const SatState&) const = default;
};

/// Saturated law plus the integral-like sigma channel.
struct IntGains {
  SatGains sat;
  Vec2 alpha_sigma = Vec2(0.35, 0.3);
  Vec2 beta_sigma = Vec2(2.5, 3.0);
  Mat2 K_sigma = Mat2::Identity();

  bool operator==(const IntGains&) const = default;
};

struct IntState {
  SatState sat;
  Vec2 sigma = Vec2::Zero();

  bool operator==(const IntState&) const = default;
};

/// u = 0. Used for the passive decay demo; carries no gains.
struct OpenLoop {
  bool operator==(const OpenLoop&) const = default;
};

using ControllerSpec = std::variant<OpenLoop, PiGains, SatGains, IntGains>;

/// Number of internal controller states: 0 (open loop, PI), 4 (saturated), 6 (integral).
int controller_state_dim(const ControllerSpec& spec);
int closed_loop_dim(const ControllerSpec& spec);
std::string controller_kind(const ControllerSpec& spec);
Vec2 reference(const ControllerSpec& spec);
void set_reference(ControllerSpec& spec, const Vec2& q_star);

struct MatrixCheck {
  std::string name;
  double min_eigenvalue = 0.0;
  bool pass = false;
};

/// Outcome of a gain-condition test. `margin` is the smallest eigenvalue over
/// all definiteness checks; `schur_block` is the matrix of the coupling
/// condition (the one that involves plant damping).
struct GainCertificate {
  bool pass = false;
  double margin = 0.0;
  std::vector<MatrixCheck> checks;
  Mat2 schur_block = Mat2::Zero();

  std::string failed_checks() const;
};

/// K_Pm > 0, K_I > 0, D_m + K_Pm - 1/4 K_Pl^T D_l^{-1} K_Pl > 0.
/// Throws GainError when K_Pm or K_I is not symmetric.
GainCertificate validate_pi_gains(const PlantParams& params, const PiGains& g);

/// R_cl - 1/4 (D_l^{-1} + D_m^{-1}) > 0 and R_cl, R_cm, K_c > 0.
/// Throws GainError for asymmetric matrices, negative alpha, or non-positive beta.
GainCertificate validate_sat_gains(const PlantParams& params, const SatGains& g);

/// validate_sat_gains plus a diagonal positive K_sigma and positive sigma slopes.
GainCertificate validate_int_gains(const PlantParams& params, const IntGains& g);

GainCertificate validate_gains(const PlantParams& params, const ControllerSpec& spec);

/// Componentwise sum_i alpha_i / beta_i * ln cosh(beta_i z_i).
double sat_potential(const Vec2& alpha, const Vec2& beta, const Vec2& z);
/// alpha_i tanh(beta_i z_i)
Vec2 sat_potential_grad(const Vec2& alpha, const Vec2& beta, const Vec2& z);
/// Diagonal of the Hessian: alpha_i beta_i sech^2(beta_i z_i).
Vec2 sat_potential_hessian(const Vec2& alpha, const Vec2& beta, const Vec2& z);

Vec2 link_error(const SatGains& g, const Vec4& q, const SatState& cs);
Vec2 motor_error(const SatGains& g, const Vec4& q, const SatState& cs);

Vec2 pi_control(const PlantParams& params, const PiGains& g, const PlantState& x);

/// Position-only law u = -grad Phi_l(z_l) - grad Phi_m(z_m).
Vec2 sat_control(const SatGains& g, const Vec4& q, const SatState& cs);

struct SatStateRate {
  Vec2 x_cl;
  Vec2 x_cm;
};

SatStateRate sat_controller_dynamics(const SatGains& g, const Vec4& q, const SatState& cs);

Vec2 int_control(const IntGains& g, const Vec4& q, const IntState& cs);

struct IntStateRate {
  SatStateRate sat;
  Vec2 sigma;
};

/// sigma' = hess Phi_sigma(sigma) (q_m - q*) - K_sigma sigma
IntStateRate int_controller_dynamics(const IntGains& g, const Vec4& q, const IntState& cs);

/// Per-channel bound on |u_i|. Throws UnboundedControlError for the PI law.
Vec2 saturation_bound(const ControllerSpec& spec);

/// Compares saturation_bound against params.u_max. Returns one warning per
/// offending channel; with `strict` the first violation throws GainError.
std::vector<std::string> check_actuator_budget(const PlantParams& params, const ControllerSpec& spec,
                                               bool strict);

}  // namespace flexarm
