#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flexarm/controllers.hpp"
#include "flexarm/linalg.hpp"
#include "flexarm/plant.hpp"

namespace flexarm {

enum class Integrator { rk4, euler };

struct SimConfig {
  double dt = 1e-3;
  double t_final = 300.0;
  Integrator integrator = Integrator::rk4;
  int record_stride = 1;

  void validate() const;
  /// round(t_final / dt)
  long long steps() const;

  bool operator==(const SimConfig&) const = default;
};

/// Actuator imperfection applied to the commanded input before the plant.
struct ActuatorModel {
  enum class Kind { ideal, deadzone, clamp };

  Kind kind = Kind::ideal;
  double threshold = 0.12;  // deadzone: |u_i| <= threshold maps to 0
  double u_max = 1.2;       // clamp: componentwise saturation at +-u_max

  static ActuatorModel ideal() { return {}; }
  static ActuatorModel deadzone(double threshold = 0.12) { return {Kind::deadzone, threshold, 1.2}; }
  static ActuatorModel clamp(double u_max) { return {Kind::clamp, 0.12, u_max}; }

  void validate() const;
  Vec2 apply(const Vec2& u) const;
  std::string describe() const;

  bool operator==(const ActuatorModel&) const = default;
};

/// Plant + controller + actuator as one augmented vector field over
/// (q_l, q_m, p_l, p_m, x_cl, x_cm, sigma), truncated to the controller's dimension.
class ClosedLoopSystem {
 public:
  ClosedLoopSystem(PlantParams params, ControllerSpec spec, ActuatorModel actuator = ActuatorModel::ideal());

  int dim() const { return dim_; }
  const PlantParams& params() const { return params_; }
  const ControllerSpec& spec() const { return spec_; }
  const ActuatorModel& actuator() const { return actuator_; }

  /// (q*, q*, 0, ...); the origin for the open loop.
  VecX equilibrium() const;

  Vec2 commanded_input(const VecX& x) const;
  Vec2 applied_input(const VecX& x) const { return actuator_.apply(commanded_input(x)); }

  VecX field(const VecX& x) const;

  double energy(const VecX& x) const;
  /// H_PI for the PI loop, H_zeta for both saturated loops (zeta part only
  /// for the integral loop), H otherwise.
  double shaped_energy(const VecX& x) const;

 private:
  void check_dim(const VecX& x) const;

  PlantParams params_;
  ControllerSpec spec_;
  ActuatorModel actuator_;
  int dim_;
};

using VectorField = std::function<VecX(const VecX&)>;

/// One fixed step from time t. Throws DivergenceError (carrying t) when any
/// stage derivative is non-finite.
VecX step(const VectorField& field, double t, const VecX& x, double dt, Integrator integrator = Integrator::rk4);

struct Trajectory {
  std::string controller;  // controller_kind of the simulated spec
  int state_dim = 8;
  std::vector<double> times;
  std::vector<VecX> states;
  std::vector<Vec2> inputs;     // after the actuator model
  std::vector<Vec2> commanded;  // before the actuator model
  std::vector<double> energy;
  std::vector<double> shaped_energy;
  std::optional<double> divergence_time;

  std::size_t size() const { return times.size(); }
  bool diverged() const { return divergence_time.has_value(); }
  void record(double t, const VecX& x, const ClosedLoopSystem& sys);

  bool operator==(const Trajectory&) const = default;
};

/// Integrates the closed loop from x0. Refuses (CertificateError) gains whose
/// certificate fails unless `override_certificates`. A non-finite state ends
/// the run early; the partial trajectory is returned with divergence_time set.
Trajectory simulate(const PlantParams& params, const ControllerSpec& spec, const ActuatorModel& actuator,
                    const VecX& x0, const SimConfig& cfg, bool override_certificates = false);

inline constexpr double kEnergyUptickTol = 1e-9;
inline constexpr double kDefaultSettleTol = 0.01;

struct Metrics {
  Vec2 steady_state_error = Vec2::Zero();  // mean |q_l - q*| over the final 10% of the horizon
  Vec2 max_abs_u = Vec2::Zero();
  double settle_time = 0.0;  // +inf when never settled
  int energy_violations = 0;
};

Metrics compute_metrics(const Trajectory& traj, const Vec2& q_star, double settle_tol = kDefaultSettleTol);

std::string csv_header(int state_dim);
/// One row per sample, 17 significant digits.
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace flexarm
