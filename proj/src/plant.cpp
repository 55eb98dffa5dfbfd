#include "flexarm/plant.hpp"

#include <cmath>
#include <string>

#include "flexarm/errors.hpp"

namespace flexarm {

Mat2 PlantParams::motor_inertia() const { return Vec2(Im1, Im2).asDiagonal(); }
Mat2 PlantParams::link_damping() const { return Vec2(Dl1, Dl2).asDiagonal(); }
Mat2 PlantParams::motor_damping() const { return Vec2(Dm1, Dm2).asDiagonal(); }
Mat2 PlantParams::stiffness() const { return Vec2(ks1, ks2).asDiagonal(); }

void PlantParams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"a1", a1},   {"a2", a2},   {"b", b},     {"Im1", Im1}, {"Im2", Im2}, {"Dl1", Dl1},
      {"Dl2", Dl2}, {"Dm1", Dm1}, {"Dm2", Dm2}, {"ks1", ks1}, {"ks2", ks2}, {"u_max", u_max}};
  for (const auto& [name, value] : fields) {
    if (!(std::isfinite(value) && value > 0.0)) {
      throw ConfigError(std::string("plant parameter ") + name + " must be finite and positive");
    }
  }
  if (!(a1 * a2 - b * b > 0.0)) {
    throw ConfigError("plant parameters violate a1*a2 - b^2 > 0; link mass matrix can become singular");
  }
}

Vec4 PlantState::q() const { return (Vec4() << q_l, q_m).finished(); }
Vec4 PlantState::p() const { return (Vec4() << p_l, p_m).finished(); }

Vec8 PlantState::to_vector() const { return (Vec8() << q_l, q_m, p_l, p_m).finished(); }

PlantState PlantState::from_vector(const Eigen::Ref<const VecX>& v) {
  if (v.size() < 8) throw std::invalid_argument("plant state needs at least 8 entries");
  PlantState x;
  x.q_l = v.segment<2>(0);
  x.q_m = v.segment<2>(2);
  x.p_l = v.segment<2>(4);
  x.p_m = v.segment<2>(6);
  return x;
}

bool PlantState::is_finite() const { return to_vector().allFinite(); }

Mat2 link_mass_matrix(const PlantParams& params, double q_l2) {
  const double c = params.b * std::cos(q_l2);
  Mat2 m;
  m << params.a1 + params.a2 + 2.0 * c, params.a2 + c,
       params.a2 + c, params.a2;
  return m;
}

Mat2 link_mass_matrix_inverse(const PlantParams& params, double q_l2) {
  const Mat2 m = link_mass_matrix(params, q_l2);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat2 inv;
  inv << m(1, 1), -m(0, 1),
         -m(1, 0), m(0, 0);
  return inv / det;
}

Mat2 link_mass_matrix_derivative(const PlantParams& params, double q_l2) {
  const double s = params.b * std::sin(q_l2);
  Mat2 d;
  d << -2.0 * s, -s,
       -s, 0.0;
  return d;
}

Mat4 mass_matrix(const PlantParams& params, double q_l2) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<2, 2>() = link_mass_matrix(params, q_l2);
  m.bottomRightCorner<2, 2>() = params.motor_inertia();
  return m;
}

Mat4 mass_matrix_derivative(const PlantParams& params, double q_l2) {
  Mat4 d = Mat4::Zero();
  d.topLeftCorner<2, 2>() = link_mass_matrix_derivative(params, q_l2);
  return d;
}

Vec4 velocities(const PlantParams& params, const PlantState& x) {
  Vec4 v;
  v.head<2>() = link_mass_matrix_inverse(params, x.q_l(1)) * x.p_l;
  v.tail<2>() = x.p_m.cwiseQuotient(Vec2(params.Im1, params.Im2));
  return v;
}

double hamiltonian(const PlantParams& params, const PlantState& x) {
  const Vec4 v = velocities(params, x);
  const Vec2 stretch = x.q_l - x.q_m;
  return 0.5 * x.p().dot(v) + 0.5 * stretch.dot(params.stiffness() * stretch);
}

Vec8 HamiltonianGradient::stacked() const { return (Vec8() << dq, dp).finished(); }

HamiltonianGradient grad_hamiltonian(const PlantParams& params, const PlantState& x) {
  HamiltonianGradient g;
  g.dp = velocities(params, x);
  const Vec2 spring = params.stiffness() * (x.q_l - x.q_m);
  g.dq << spring, -spring;
  // d/dq_l2 of 1/2 p_l^T M_l^{-1} p_l = -1/2 v_l^T (dM_l/dq_l2) v_l
  const Vec2 v_l = g.dp.head<2>();
  g.dq(1) -= 0.5 * v_l.dot(link_mass_matrix_derivative(params, x.q_l(1)) * v_l);
  return g;
}

Vec8 open_loop_dynamics(const PlantParams& params, const PlantState& x, const Vec2& u) {
  const HamiltonianGradient g = grad_hamiltonian(params, x);
  Vec8 dx;
  dx.head<4>() = g.dp;
  dx.segment<2>(4) = -g.dq.head<2>() - params.link_damping() * g.dp.head<2>();
  dx.segment<2>(6) = -g.dq.tail<2>() - params.motor_damping() * g.dp.tail<2>() + u;
  return dx;
}

}  // namespace flexarm
