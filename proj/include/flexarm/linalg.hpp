#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace flexarm {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Strict definiteness threshold: a symmetric matrix counts as positive
/// definite when its smallest eigenvalue exceeds this value.
inline constexpr double kDefiniteTol = 1e-10;

/// Relative residual bound every reported eigenpair must satisfy.
inline constexpr double kEigenResidualTol = 1e-8;

bool is_symmetric(const MatX& a);

MatX sym(const MatX& a);

/// Eigenvalues (ascending) of a symmetric matrix. Every pair is checked
/// against ||Av - lv|| < 1e-8 ||A||; a failed check throws NumericalError.
VecX symmetric_eigenvalues(const MatX& a);

double min_eigenvalue(const MatX& a);
double max_eigenvalue(const MatX& a);

/// Eigenvalues of a general real square matrix, residual-checked.
Eigen::VectorXcd general_eigenvalues(const MatX& a);

void require_square(const MatX& a, std::string_view what);

}  // namespace flexarm
