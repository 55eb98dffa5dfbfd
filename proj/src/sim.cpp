#include "flexarm/sim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "flexarm/analysis.hpp"
#include "flexarm/errors.hpp"

namespace flexarm {

void SimConfig::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) throw ConfigError("sim.dt must be positive");
  if (!(std::isfinite(t_final) && t_final >= dt)) throw ConfigError("sim.t_final must be at least dt");
  if (record_stride < 1) throw ConfigError("sim.record_stride must be >= 1");
}

long long SimConfig::steps() const { return std::llround(t_final / dt); }

void ActuatorModel::validate() const {
  if (kind == Kind::deadzone && !(std::isfinite(threshold) && threshold >= 0.0)) {
    throw ConfigError("deadzone threshold must be non-negative");
  }
  if (kind == Kind::clamp && !(std::isfinite(u_max) && u_max > 0.0)) {
    throw ConfigError("clamp limit must be positive");
  }
}

Vec2 ActuatorModel::apply(const Vec2& u) const {
  switch (kind) {
    case Kind::ideal:
      return u;
    case Kind::deadzone:
      return u.unaryExpr([t = threshold](double v) { return std::abs(v) <= t ? 0.0 : v; });
    case Kind::clamp:
      return u.cwiseMax(-u_max).cwiseMin(u_max);
  }
  return u;
}

std::string ActuatorModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::ideal:
      os << "ideal";
      break;
    case Kind::deadzone:
      os << "deadzone:" << threshold;
      break;
    case Kind::clamp:
      os << "clamp:" << u_max;
      break;
  }
  return os.str();
}

ClosedLoopSystem::ClosedLoopSystem(PlantParams params, ControllerSpec spec, ActuatorModel actuator)
    : params_(params), spec_(std::move(spec)), actuator_(actuator), dim_(closed_loop_dim(spec_)) {}

void ClosedLoopSystem::check_dim(const VecX& x) const {
  if (x.size() != dim_) {
    throw std::invalid_argument("closed-loop state has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(dim_));
  }
}

VecX ClosedLoopSystem::equilibrium() const {
  VecX x = VecX::Zero(dim_);
  const Vec2 q_star = reference(spec_);
  x.segment<2>(0) = q_star;
  x.segment<2>(2) = q_star;
  return x;
}

Vec2 ClosedLoopSystem::commanded_input(const VecX& x) const {
  check_dim(x);
  if (const auto* g = std::get_if<PiGains>(&spec_)) return pi_control(params_, *g, PlantState::from_vector(x));
  if (const auto* g = std::get_if<SatGains>(&spec_)) return sat_control(*g, x.head<4>(), {x.segment<2>(8), x.segment<2>(10)});
  if (const auto* g = std::get_if<IntGains>(&spec_)) {
    return int_control(*g, x.head<4>(), {{x.segment<2>(8), x.segment<2>(10)}, x.segment<2>(12)});
  }
  return Vec2::Zero();
}

VecX ClosedLoopSystem::field(const VecX& x) const {
  const Vec2 u = applied_input(x);
  VecX dx(dim_);
  dx.head<8>() = open_loop_dynamics(params_, PlantState::from_vector(x), u);
  const Vec4 q = x.head<4>();
  if (const auto* g = std::get_if<SatGains>(&spec_)) {
    const SatStateRate r = sat_controller_dynamics(*g, q, {x.segment<2>(8), x.segment<2>(10)});
    dx.segment<2>(8) = r.x_cl;
    dx.segment<2>(10) = r.x_cm;
  } else if (const auto* g = std::get_if<IntGains>(&spec_)) {
    const IntStateRate r = int_controller_dynamics(*g, q, {{x.segment<2>(8), x.segment<2>(10)}, x.segment<2>(12)});
    dx.segment<2>(8) = r.sat.x_cl;
    dx.segment<2>(10) = r.sat.x_cm;
    dx.segment<2>(12) = r.sigma;
  }
  return dx;
}

double ClosedLoopSystem::energy(const VecX& x) const {
  check_dim(x);
  return hamiltonian(params_, PlantState::from_vector(x));
}

double ClosedLoopSystem::shaped_energy(const VecX& x) const {
  check_dim(x);
  const PlantState plant = PlantState::from_vector(x);
  if (const auto* g = std::get_if<PiGains>(&spec_)) return shaped_hamiltonian_pi(params_, *g, plant);
  if (const auto* g = std::get_if<SatGains>(&spec_)) {
    return shaped_hamiltonian_zeta(params_, *g, plant, {x.segment<2>(8), x.segment<2>(10)});
  }
  if (const auto* g = std::get_if<IntGains>(&spec_)) {
    return shaped_hamiltonian_zeta(params_, g->sat, plant, {x.segment<2>(8), x.segment<2>(10)});
  }
  return hamiltonian(params_, plant);
}

VecX step(const VectorField& field, double t, const VecX& x, double dt, Integrator integrator) {
  auto checked = [&](const VecX& s) {
    VecX d = field(s);
    if (!d.allFinite()) throw DivergenceError("non-finite state derivative", t);
    return d;
  };
  if (integrator == Integrator::euler) return x + dt * checked(x);
  const VecX k1 = checked(x);
  const VecX k2 = checked(x + 0.5 * dt * k1);
  const VecX k3 = checked(x + 0.5 * dt * k2);
  const VecX k4 = checked(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void Trajectory::record(double t, const VecX& x, const ClosedLoopSystem& sys) {
  const Vec2 u = sys.commanded_input(x);
  times.push_back(t);
  states.push_back(x);
  commanded.push_back(u);
  inputs.push_back(sys.actuator().apply(u));
  energy.push_back(sys.energy(x));
  shaped_energy.push_back(sys.shaped_energy(x));
}

Trajectory simulate(const PlantParams& params, const ControllerSpec& spec, const ActuatorModel& actuator,
                    const VecX& x0, const SimConfig& cfg, bool override_certificates) {
  params.validate();
  cfg.validate();
  actuator.validate();
  const GainCertificate cert = validate_gains(params, spec);
  if (!cert.pass && !override_certificates) {
    throw CertificateError("gain certificate failed: " + cert.failed_checks());
  }
  const ClosedLoopSystem sys(params, spec, actuator);
  if (x0.size() != sys.dim()) {
    throw ConfigError("initial state has " + std::to_string(x0.size()) + " entries, controller needs " +
                      std::to_string(sys.dim()));
  }
  if (!x0.allFinite()) throw ConfigError("initial state has non-finite entries");

  Trajectory traj;
  traj.controller = controller_kind(spec);
  traj.state_dim = sys.dim();
  const long long n = cfg.steps();
  traj.times.reserve(static_cast<std::size_t>(n / cfg.record_stride + 1));

  const VectorField field = [&sys](const VecX& x) { return sys.field(x); };
  VecX x = x0;
  traj.record(0.0, x, sys);
  for (long long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    try {
      x = step(field, t, x, cfg.dt, cfg.integrator);
    } catch (const DivergenceError& e) {
      traj.divergence_time = e.time();
      return traj;
    }
    if (!x.allFinite()) {
      traj.divergence_time = static_cast<double>(k + 1) * cfg.dt;
      return traj;
    }
    if ((k + 1) % cfg.record_stride == 0) traj.record(static_cast<double>(k + 1) * cfg.dt, x, sys);
  }
  return traj;
}

Metrics compute_metrics(const Trajectory& traj, const Vec2& q_star, double settle_tol) {
  if (traj.size() == 0) throw std::invalid_argument("compute_metrics: empty trajectory");
  Metrics m;
  const std::size_t n = traj.size();
  const double t0 = traj.times.front();
  const double window_start = traj.times.back() - 0.1 * (traj.times.back() - t0);

  std::size_t window = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 err = (traj.states[k].head<2>() - q_star).cwiseAbs();
    if (traj.times[k] >= window_start) {
      m.steady_state_error += err;
      ++window;
    }
    m.max_abs_u = m.max_abs_u.cwiseMax(traj.inputs[k].cwiseAbs());
    if (k > 0 && traj.shaped_energy[k] > traj.shaped_energy[k - 1] + kEnergyUptickTol) ++m.energy_violations;
  }
  m.steady_state_error /= static_cast<double>(window);

  // Walk back from the end to the last sample outside the tolerance band.
  m.settle_time = std::numeric_limits<double>::infinity();
  for (std::size_t k = n; k-- > 0;) {
    const double err = (traj.states[k].head<2>() - q_star).cwiseAbs().maxCoeff();
    if (!(err < settle_tol)) break;
    m.settle_time = traj.times[k];
  }
  return m;
}

std::string csv_header(int state_dim) {
  std::string h = "t,ql1,ql2,qm1,qm2,pl1,pl2,pm1,pm2";
  if (state_dim >= 12) h += ",xcl1,xcl2,xcm1,xcm2";
  if (state_dim >= 14) h += ",sig1,sig2";
  h += ",u1,u2,H,H_shaped";
  return h;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << csv_header(traj.state_dim) << '\n';
  char buf[32];
  auto put = [&](double v, bool first = false) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!first) os << ',';
    os << buf;
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    put(traj.times[k], true);
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) put(traj.states[k](i));
    put(traj.inputs[k](0));
    put(traj.inputs[k](1));
    put(traj.energy[k]);
    put(traj.shaped_energy[k]);
    os << '\n';
  }
}

}  // namespace flexarm
