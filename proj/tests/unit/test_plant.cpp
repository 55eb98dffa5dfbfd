#include <doctest.h>

#include <numbers>

#include "flexarm/errors.hpp"
#include "flexarm/plant.hpp"
#include "flexarm/sim.hpp"
#include "test_support.hpp"

using namespace flexarm;
using doctest::Approx;

namespace {

const PlantParams kParams = PlantParams::quanser();

// [0 I; -I -R2] grad H + [0; B] u, assembled as full matrices.
Vec8 structured_open_loop(const PlantParams& p, const PlantState& x, const Vec2& u) {
  Mat8 j = Mat8::Zero();
  j.topRightCorner<4, 4>() = Mat4::Identity();
  j.bottomLeftCorner<4, 4>() = -Mat4::Identity();
  j.block<2, 2>(4, 4) = -p.link_damping();
  j.block<2, 2>(6, 6) = -p.motor_damping();
  Eigen::Matrix<double, 8, 2> b = Eigen::Matrix<double, 8, 2>::Zero();
  b.bottomRows<2>() = Mat2::Identity();
  return j * grad_hamiltonian(p, x).stacked() + b * u;
}

}  // namespace

TEST_CASE("parameters: defaults are valid and inertia determinant is positive") {
  CHECK_NOTHROW(kParams.validate());
  CHECK(kParams.a1 * kParams.a2 - kParams.b * kParams.b == Approx(0.003408).epsilon(1e-9));
  PlantParams bad = kParams;
  bad.b = 0.2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = kParams;
  bad.Dm2 = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("mass matrix at q_l2 = 0 and pi/2") {
  const Mat4 m0 = mass_matrix(kParams, 0.0);
  CHECK(m0(0, 0) == Approx(0.393));
  CHECK(m0(0, 1) == Approx(0.159));
  CHECK(m0(1, 0) == Approx(0.159));
  CHECK(m0(1, 1) == Approx(0.073));
  const Mat4 m90 = mass_matrix(kParams, std::numbers::pi / 2);
  CHECK(m90(0, 0) == Approx(0.221));
  CHECK(m90(0, 1) == Approx(0.073));
  CHECK(m90(1, 1) == Approx(0.073));
  for (double q : {-3.0, 0.0, 1.0, 2.5}) {
    const Mat4 m = mass_matrix(kParams, q);
    CHECK(m(2, 2) == 0.217);
    CHECK(m(3, 3) == 0.007);
    CHECK(m.block<2, 2>(0, 2).isZero(0.0));
    CHECK(m == m.transpose());
  }
}

TEST_CASE("link mass matrix stays positive definite over 1e6 samples") {
  testing::Rng rng(1);
  double worst = 1e300;
  for (int k = 0; k < 1'000'000; ++k) {
    worst = std::min(worst, testing::min_eig_2x2(link_mass_matrix(kParams, rng.uniform(-M_PI, M_PI))));
  }
  CHECK(worst > 0.0);
}

TEST_CASE("closed-form link inverse matches a general inverse") {
  for (double q : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
    const Mat2 diff = link_mass_matrix_inverse(kParams, q) - link_mass_matrix(kParams, q).inverse();
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mass matrix derivative: examples and finite-difference oracle") {
  CHECK(mass_matrix_derivative(kParams, 0.0).isZero(0.0));
  const Mat4 d = mass_matrix_derivative(kParams, std::numbers::pi / 2);
  CHECK(d(0, 0) == Approx(-0.172));
  CHECK(d(0, 1) == Approx(-0.086));
  CHECK(d(1, 0) == Approx(-0.086));
  CHECK(d(1, 1) == 0.0);
  testing::Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const double q = rng.uniform(-M_PI, M_PI);
    const double h = 1e-5;
    const Mat4 fd = (mass_matrix(kParams, q + h) - mass_matrix(kParams, q - h)) / (2 * h);
    const Mat4 an = mass_matrix_derivative(kParams, q);
    CHECK((fd - an).cwiseAbs().maxCoeff() / std::max(an.cwiseAbs().maxCoeff(), 1e-3) < 1e-8);
  }
}

TEST_CASE("hamiltonian examples") {
  CHECK(hamiltonian(kParams, PlantState{}) == 0.0);
  PlantState x;
  x.q_l = Vec2(1, -1);
  x.q_m = Vec2(1, -1);
  CHECK(hamiltonian(kParams, x) == 0.0);
  x = PlantState{};
  x.q_l = Vec2(0.1, 0.0);
  CHECK(hamiltonian(kParams, x) == Approx(0.045).epsilon(1e-12));

  testing::Rng rng(4);
  for (int k = 0; k < 1000; ++k) CHECK(hamiltonian(kParams, rng.plant_state()) >= 0.0);
}

TEST_CASE("gradient matches central finite differences at random states") {
  testing::Rng rng(5);
  auto h_of = [](const VecX& v) { return hamiltonian(kParams, PlantState::from_vector(v)); };
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const PlantState x = rng.plant_state();
    const VecX fd = testing::fd_gradient(h_of, x.to_vector(), 1e-6);
    worst = std::max(worst, testing::rel_error(grad_hamiltonian(kParams, x).stacked(), fd));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("gradient special cases") {
  PlantState x;
  x.q_l = x.q_m = Vec2(0.4, -1.3);
  CHECK(grad_hamiltonian(kParams, x).stacked().isZero(0.0));

  x = PlantState{};
  x.q_l = x.q_m = Vec2(0.0, 0.8);
  x.p_m = Vec2(0.3, -0.2);
  CHECK(grad_hamiltonian(kParams, x).dq(1) == 0.0);
}

TEST_CASE("open-loop dynamics: equilibrium, input routing, dissipation") {
  PlantState x;
  x.q_l = x.q_m = Vec2(-1, 1);
  CHECK(open_loop_dynamics(kParams, x, Vec2::Zero()).isZero(0.0));

  const Vec8 d = open_loop_dynamics(kParams, PlantState{}, Vec2(1, 0));
  CHECK(d.segment<2>(6) == Vec2(1, 0));
  CHECK(d.segment<2>(4).isZero(0.0));
  CHECK(d.head<4>().isZero(0.0));

  testing::Rng rng(6);
  for (int k = 0; k < 200; ++k) {
    const PlantState s = rng.plant_state();
    const HamiltonianGradient g = grad_hamiltonian(kParams, s);
    const double hdot = g.stacked().dot(open_loop_dynamics(kParams, s, Vec2::Zero()));
    const double expected = -(g.dp.head<2>().dot(kParams.link_damping() * g.dp.head<2>()) +
                              g.dp.tail<2>().dot(kParams.motor_damping() * g.dp.tail<2>()));
    CHECK(hdot <= 1e-12);
    CHECK(hdot == Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("open-loop dynamics equals the structured port-Hamiltonian form") {
  testing::Rng rng(7);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const PlantState s = rng.plant_state();
    const Vec2 u = rng.vec2(-1.5, 1.5);
    worst = std::max(worst, testing::rel_error(open_loop_dynamics(kParams, s, u), structured_open_loop(kParams, s, u)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("energy is non-increasing along unforced trajectories") {
  const ClosedLoopSystem sys(kParams, OpenLoop{});
  testing::Rng rng(8);
  for (int run = 0; run < 5; ++run) {
    VecX x = rng.vector(8, -1.0, 1.0);
    double h = sys.energy(x);
    for (int k = 0; k < 5000; ++k) {
      x = step([&](const VecX& s) { return sys.field(s); }, k * 1e-3, x, 1e-3);
      const double h_next = sys.energy(x);
      REQUIRE(h_next <= h + 1e-9);
      h = h_next;
    }
  }
}
