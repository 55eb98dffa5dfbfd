#include "flexarm/linalg.hpp"

#include <limits>
#include <string>

#include "flexarm/errors.hpp"

namespace flexarm {

namespace {

double residual_scale(const MatX& a) {
  return kEigenResidualTol * a.norm() + std::numeric_limits<double>::min();
}

}  // namespace

void require_square(const MatX& a, std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": expected a non-empty square matrix, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

bool is_symmetric(const MatX& a) {
  if (a.rows() != a.cols()) return false;
  const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

MatX sym(const MatX& a) { return 0.5 * (a + a.transpose()); }

VecX symmetric_eigenvalues(const MatX& a) {
  require_square(a, "symmetric_eigenvalues");
  Eigen::SelfAdjointEigenSolver<MatX> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  const double bound = residual_scale(a);
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const VecX v = solver.eigenvectors().col(k);
    const double r = (a * v - solver.eigenvalues()(k) * v).norm();
    if (!(r < bound)) throw NumericalError("symmetric eigenpair residual " + std::to_string(r) + " too large");
  }
  return solver.eigenvalues();
}

double min_eigenvalue(const MatX& a) { return symmetric_eigenvalues(a).minCoeff(); }

double max_eigenvalue(const MatX& a) { return symmetric_eigenvalues(a).maxCoeff(); }

Eigen::VectorXcd general_eigenvalues(const MatX& a) {
  require_square(a, "general_eigenvalues");
  Eigen::EigenSolver<MatX> solver(a, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  const double bound = residual_scale(a);
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const Eigen::VectorXcd v = solver.eigenvectors().col(k);
    const double r = (ac * v - solver.eigenvalues()(k) * v).norm() / std::max(v.norm(), 1e-300);
    if (!(r < bound)) throw NumericalError("eigenpair residual " + std::to_string(r) + " too large");
  }
  return solver.eigenvalues();
}

}  // namespace flexarm
