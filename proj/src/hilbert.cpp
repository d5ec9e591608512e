#include "touchpoint/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "touchpoint/errors.hpp"

namespace touchpoint::hilbert {

namespace {

constexpr double kOrthonormalityTol = 1e-12;

Eigen::JacobiSVD<Matrix> singular_values_of(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m);
}

void require_square(const LinearOperator& a, const char* what) {
  if (!a.is_square()) {
    throw InputError(std::string(what) + ": operator must be square, got " +
                     std::to_string(a.codomain_dim()) + "x" + std::to_string(a.domain_dim()));
  }
}

}  // namespace

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite vector entry");
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite matrix entry");
}

void require_dim(const Vector& v, Eigen::Index dim, const char* what) {
  if (v.size() != dim) {
    throw InputError(std::string(what) + ": dimension mismatch (expected " + std::to_string(dim) +
                     ", got " + std::to_string(v.size()) + ")");
  }
}

LinearOperator::LinearOperator(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0 && matrix_.cols() != 0) throw InputError("LinearOperator: empty codomain");
  require_finite(matrix_, "LinearOperator");
}

LinearOperator LinearOperator::identity(Eigen::Index n) { return LinearOperator(Matrix::Identity(n, n)); }

LinearOperator LinearOperator::zero(Eigen::Index rows, Eigen::Index cols) {
  return LinearOperator(Matrix::Zero(rows, cols));
}

Vector LinearOperator::apply(const Vector& x) const {
  require_dim(x, domain_dim(), "LinearOperator::apply");
  return matrix_ * x;
}

Matrix LinearOperator::symmetric_part() const {
  require_square(*this, "symmetric_part");
  return 0.5 * (matrix_ + matrix_.transpose());
}

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  require_finite(basis_, "Subspace");
  if (basis_.cols() > basis_.rows()) throw InputError("Subspace: rank exceeds ambient dimension");
  const Matrix gram = basis_.transpose() * basis_;
  const double defect =
      gram.size() == 0 ? 0.0 : (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (defect > kOrthonormalityTol) {
    throw InputError("Subspace: basis is not orthonormal (defect " + std::to_string(defect) + ")");
  }
}

Subspace Subspace::whole(Eigen::Index n) { return Subspace(Matrix::Identity(n, n)); }

Subspace Subspace::zero(Eigen::Index n) { return Subspace(Matrix::Zero(n, 0)); }

Vector Subspace::coordinates(const Vector& x) const {
  require_dim(x, ambient_dim(), "Subspace::coordinates");
  return basis_.transpose() * x;
}

Vector Subspace::embed(const Vector& coords) const {
  require_dim(coords, rank(), "Subspace::embed");
  return basis_ * coords;
}

Subspace orthonormal_range(const LinearOperator& a, double rank_tol) {
  if (!(rank_tol > 0.0)) throw ParameterError("orthonormal_range: rank_tol must be positive");
  const Matrix& m = a.matrix();
  if (m.size() == 0) return Subspace::zero(m.rows());

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const Vector& sigma = svd.singularValues();
  const double cutoff = rank_tol * sigma(0);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;

  Matrix basis = svd.matrixU().leftCols(rank);
  // Fix the sign of each column so the largest-magnitude entry is positive.
  for (Eigen::Index j = 0; j < rank; ++j) {
    Eigen::Index at = 0;
    basis.col(j).cwiseAbs().maxCoeff(&at);
    if (basis(at, j) < 0.0) basis.col(j) *= -1.0;
  }
  return Subspace(std::move(basis));
}

Vector project_onto(const Subspace& y, const Vector& x) {
  require_dim(x, y.ambient_dim(), "project_onto");
  require_finite(x, "project_onto");
  return y.basis() * (y.basis().transpose() * x);
}

double operator_norm(const LinearOperator& a) {
  if (a.matrix().size() == 0) return 0.0;
  return singular_values_of(a.matrix()).singularValues()(0);
}

double min_singular_value(const LinearOperator& a) {
  if (a.matrix().size() == 0) return 0.0;
  const Vector sigma = singular_values_of(a.matrix()).singularValues();
  return sigma(sigma.size() - 1);
}

double max_sym_eigenvalue(const Matrix& a) {
  if (a.rows() != a.cols()) throw InputError("max_sym_eigenvalue: operator must be square");
  if (a.size() == 0) throw InputError("max_sym_eigenvalue: empty operator");
  require_finite(a, "max_sym_eigenvalue");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double max_sym_eigenvalue(const LinearOperator& a) { return max_sym_eigenvalue(a.matrix()); }

LinearOperator invert(const LinearOperator& a, double cond_tol) {
  require_square(a, "invert");
  if (a.domain_dim() == 0) throw InputError("invert: empty operator");
  const Vector sigma = singular_values_of(a.matrix()).singularValues();
  const double smax = sigma(0);
  const double smin = sigma(sigma.size() - 1);
  if (smax == 0.0 || smin / smax <= cond_tol) {
    throw SingularityError("invert: operator is not bijective (sigma_min/sigma_max = " +
                           std::to_string(smax == 0.0 ? 0.0 : smin / smax) + ")");
  }
  const Eigen::Index n = a.domain_dim();
  Eigen::FullPivLU<Matrix> lu(a.matrix());
  Matrix inv = lu.solve(Matrix::Identity(n, n));
  // One step of iterative refinement.
  const Matrix residual = Matrix::Identity(n, n) - a.matrix() * inv;
  inv += lu.solve(residual);
  return LinearOperator(std::move(inv));
}

}  // namespace touchpoint::hilbert
