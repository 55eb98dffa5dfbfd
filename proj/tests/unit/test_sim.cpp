#include <doctest.h>

#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "flexarm/analysis.hpp"
#include "flexarm/errors.hpp"
#include "flexarm/scenario.hpp"
#include "flexarm/sim.hpp"
#include "test_support.hpp"

using namespace flexarm;
using doctest::Approx;

namespace {

const PlantParams kParams = PlantParams::quanser();

Scenario builtin(const char* name) { return *find_builtin(name); }

SimConfig short_run(double t_final, int stride = 1) {
  SimConfig cfg;
  cfg.t_final = t_final;
  cfg.record_stride = stride;
  return cfg;
}

}  // namespace

TEST_CASE("sim config and actuator validation") {
  SimConfig cfg;
  CHECK(cfg.dt == 1e-3);
  CHECK_NOTHROW(cfg.validate());
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SimConfig{};
  cfg.t_final = 1e-4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SimConfig{};
  cfg.record_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  const ActuatorModel dz = ActuatorModel::deadzone();
  CHECK(dz.threshold == 0.12);
  CHECK(dz.apply(Vec2(0.12, -0.05)) == Vec2::Zero());
  CHECK(dz.apply(Vec2(0.13, -0.5)) == Vec2(0.13, -0.5));
  CHECK(ActuatorModel::clamp(1.0).apply(Vec2(3.0, -0.5)) == Vec2(1.0, -0.5));
  CHECK(ActuatorModel::clamp(1.0).apply(Vec2(-3.0, 0.5)) == Vec2(-1.0, 0.5));
  CHECK(ActuatorModel::ideal().apply(Vec2(7.0, -7.0)) == Vec2(7.0, -7.0));
  CHECK_THROWS_AS(ActuatorModel::deadzone(-0.1).validate(), ConfigError);
}

TEST_CASE("integrator step") {
  const VectorField zero = [](const VecX& x) { return VecX::Zero(x.size()); };
  const VecX x = VecX::Constant(3, 1.5);
  CHECK(step(zero, 0.0, x, 0.1) == x);

  const VectorField decay = [](const VecX& x) { return VecX(-x); };
  CHECK(step(decay, 0.0, VecX::Ones(1), 0.1)(0) == Approx(0.9048375000000001).epsilon(1e-15));
  CHECK(step(decay, 0.0, VecX::Ones(1), 0.1, Integrator::euler)(0) == Approx(0.9));

  const VectorField blowup = [](const VecX& x) {
    VecX d = x;
    d(0) = std::numeric_limits<double>::quiet_NaN();
    return d;
  };
  try {
    step(blowup, 2.5, VecX::Ones(2), 0.1);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.time() == 2.5);
  }
}

TEST_CASE("RK4 global error is fourth order against the matrix exponential") {
  testing::Rng rng(41);
  const MatX a = rng.vector(16, -1, 1).reshaped(4, 4) - 1.5 * MatX::Identity(4, 4);
  const VecX x0 = rng.vector(4, -1, 1);
  const double t_end = 2.0;
  const VecX exact = (a * t_end).exp() * x0;
  const VectorField f = [&a](const VecX& x) { return VecX(a * x); };
  auto run = [&](int n) {
    VecX x = x0;
    const double dt = t_end / n;
    for (int k = 0; k < n; ++k) x = step(f, k * dt, x, dt);
    return (x - exact).norm();
  };
  const double e1 = run(40), e2 = run(80), e3 = run(160);
  CHECK(e1 / e2 == Approx(16.0).epsilon(0.1));
  CHECK(e2 / e3 == Approx(16.0).epsilon(0.1));
}

TEST_CASE("equilibrium is invariant for every controller") {
  for (const char* name : {"PI", "C1", "INT"}) {
    CAPTURE(name);
    const Scenario s = builtin(name);
    const ClosedLoopSystem sys(s.plant, s.controller);
    CHECK(sys.field(sys.equilibrium()).isZero(0.0));
    CHECK(sys.commanded_input(sys.equilibrium()).isZero(0.0));
  }
  // 10^6 steps from zeta* and xi*.
  for (const char* name : {"C1", "INT"}) {
    CAPTURE(name);
    const Scenario s = builtin(name);
    const ClosedLoopSystem sys(s.plant, s.controller);
    const Trajectory tr = simulate(s.plant, s.controller, ActuatorModel::ideal(), sys.equilibrium(), short_run(1000.0, 1000));
    REQUIRE(tr.size() == 1001);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      worst = std::max(worst, (tr.states[k] - sys.equilibrium()).cwiseAbs().maxCoeff());
      CHECK(tr.inputs[k].isZero(0.0));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("simulate refuses uncertified gains and reports divergence") {
  Scenario s = builtin("PI");
  auto& g = std::get<PiGains>(s.controller);
  g.K_Pm = -50 * Mat2::Identity();
  CHECK_THROWS_WITH_AS(simulate(s.plant, s.controller, s.actuator, s.x0, short_run(1.0)), doctest::Contains("K_Pm"),
                       CertificateError);

  s.x0(0) += 0.1;
  const Trajectory tr = simulate(s.plant, s.controller, s.actuator, s.x0, short_run(30.0), true);
  REQUIRE(tr.diverged());
  CHECK(*tr.divergence_time < 30.0);
  CHECK(tr.size() >= 1);
  CHECK(tr.size() < 30'000);
  CHECK(tr.states.back().allFinite());

  const Scenario c1 = builtin("C1");
  CHECK_THROWS_AS(simulate(c1.plant, c1.controller, c1.actuator, VecX::Zero(8), short_run(1.0)), ConfigError);
}

TEST_CASE("trajectory recording") {
  const Scenario s = builtin("INT");
  const Trajectory tr = simulate(s.plant, s.controller, ActuatorModel::deadzone(), s.x0, short_run(2.0, 10));
  CHECK(tr.controller == "saturated_integral");
  CHECK(tr.state_dim == 14);
  REQUIRE(tr.size() == 201);
  const ClosedLoopSystem sys(s.plant, s.controller, ActuatorModel::deadzone());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(tr.times[k] == Approx(0.01 * static_cast<double>(k)).epsilon(1e-12));
    CHECK(tr.inputs[k] == ActuatorModel::deadzone().apply(tr.commanded[k]));
    CHECK(tr.commanded[k] == sys.commanded_input(tr.states[k]));
    CHECK(tr.energy[k] == sys.energy(tr.states[k]));
  }
  std::ostringstream os;
  write_csv(os, tr);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,ql1,ql2,qm1,qm2,pl1,pl2,pm1,pm2,xcl1,xcl2,xcm1,xcm2,sig1,sig2,u1,u2,H,H_shaped\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 202);
  CHECK(csv_header(8) == "t,ql1,ql2,qm1,qm2,pl1,pl2,pm1,pm2,u1,u2,H,H_shaped");

  // 17 significant digits round-trip exactly.
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  std::getline(is, line);
  std::istringstream row(line);
  std::string cell;
  std::getline(row, cell, ',');
  CHECK(std::stod(cell) == tr.times[1]);
  std::getline(row, cell, ',');
  CHECK(std::stod(cell) == tr.states[1](0));
}

TEST_CASE("determinism") {
  const Scenario s = builtin("C1");
  const Trajectory a = simulate(s.plant, s.controller, s.actuator, s.x0, short_run(5.0, 7));
  const Trajectory b = simulate(s.plant, s.controller, s.actuator, s.x0, short_run(5.0, 7));
  CHECK(a == b);
}

TEST_CASE("shaped energy is non-increasing with passing certificates") {
  for (const char* name : {"PI", "C1", "C2", "C3"}) {
    CAPTURE(name);
    Scenario s = builtin(name);
    const Trajectory tr = simulate(s.plant, s.controller, ActuatorModel::ideal(), s.x0, short_run(30.0));
    const Metrics m = compute_metrics(tr, s.q_star);
    CHECK(m.energy_violations == 0);
  }
  // Open loop: plain H decays from a displaced start.
  const Scenario ol = builtin("OPENLOOP");
  const Trajectory tr = simulate(ol.plant, ol.controller, ol.actuator, ol.x0, short_run(10.0));
  CHECK(compute_metrics(tr, ol.q_star).energy_violations == 0);
  CHECK(tr.energy.back() < tr.energy.front());
}

TEST_CASE("pre-actuator input obeys the analytic saturation bound") {
  for (const char* name : {"C1", "C2", "C3", "INT"}) {
    CAPTURE(name);
    const Scenario s = builtin(name);
    const Vec2 bound = saturation_bound(s.controller);
    const Trajectory tr = simulate(s.plant, s.controller, ActuatorModel::deadzone(), s.x0, short_run(20.0));
    for (const Vec2& u : tr.commanded) {
      REQUIRE(std::abs(u(0)) <= bound(0));
      REQUIRE(std::abs(u(1)) <= bound(1));
    }
  }
}

TEST_CASE("halving dt leaves the C1 final state unchanged at reporting precision") {
  const Scenario s = builtin("C1");
  SimConfig coarse = short_run(30.0, 30'000);
  SimConfig fine = short_run(30.0, 60'000);
  fine.dt = 5e-4;
  const Trajectory a = simulate(s.plant, s.controller, s.actuator, s.x0, coarse);
  const Trajectory b = simulate(s.plant, s.controller, s.actuator, s.x0, fine);
  REQUIRE(a.times.back() == Approx(30.0));
  REQUIRE(b.times.back() == Approx(30.0));
  CHECK((a.states.back() - b.states.back()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("metrics") {
  const Scenario s = builtin("C1");
  const ClosedLoopSystem sys(s.plant, s.controller);
  Trajectory tr;
  for (int k = 0; k <= 100; ++k) tr.record(0.01 * k, sys.equilibrium(), sys);
  Metrics m = compute_metrics(tr, s.q_star);
  CHECK(m.steady_state_error == Vec2::Zero());
  CHECK(m.settle_time == 0.0);
  CHECK(m.max_abs_u == Vec2::Zero());
  CHECK(m.energy_violations == 0);

  tr.shaped_energy[50] += 1e-6;
  m = compute_metrics(tr, s.q_star);
  CHECK(m.energy_violations == 1);
  tr.shaped_energy[50] -= 1e-6;

  // Never settles: constant offset larger than the tolerance.
  Trajectory off;
  VecX x = sys.equilibrium();
  x(0) += 0.5;
  for (int k = 0; k <= 10; ++k) off.record(0.1 * k, x, sys);
  m = compute_metrics(off, s.q_star);
  CHECK(std::isinf(m.settle_time));
  CHECK(m.steady_state_error(0) == Approx(0.5));
  CHECK(m.steady_state_error(1) == 0.0);

  // Settles at the first sample after which the error stays inside the band.
  Trajectory late;
  for (int k = 0; k <= 10; ++k) late.record(0.1 * k, k < 4 ? x : sys.equilibrium(), sys);
  CHECK(compute_metrics(late, s.q_star).settle_time == Approx(0.4));

  CHECK_THROWS_AS(compute_metrics(Trajectory{}, s.q_star), std::invalid_argument);
}

TEST_CASE("C1 settles and C3 stalls in the dead-zone") {
  const Scenario c1 = builtin("C1");
  const Trajectory tr = simulate(c1.plant, c1.controller, c1.actuator, c1.x0, c1.sim);
  const Metrics m = compute_metrics(tr, c1.q_star);
  CHECK(m.energy_violations == 0);
  CHECK(m.max_abs_u(0) <= 1.2);
  CHECK(m.max_abs_u(1) <= 1.2);
  CHECK(m.steady_state_error.maxCoeff() < 1e-3);
  // Frozen regression value from the 300 s run at dt = 1e-3, 10 ms sampling.
  CHECK(m.settle_time == Approx(109.0).epsilon(0.01));

  const Scenario c3 = builtin("C3");
  const Trajectory stall = simulate(c3.plant, c3.controller, ActuatorModel::deadzone(), c3.x0, c3.sim);
  CHECK(compute_metrics(stall, c3.q_star).steady_state_error.maxCoeff() > 0.01);
}
