#pragma once

// Finite-dimensional Hilbert-space primitives over R^n with the standard
// inner product: vectors, dense linear operators, subspaces held by an
// orthonormal basis, and the spectral quantities built on top of them.

#include <Eigen/Dense>

namespace touchpoint::hilbert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kDefaultCondTol = 1e-12;

/// Throws InputError unless every entry of `v` is finite.
void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);
/// Throws InputError when `v.size() != dim`.
void require_dim(const Vector& v, Eigen::Index dim, const char* what);

/// Dense real linear map R^domain_dim -> R^codomain_dim.
class LinearOperator {
 public:
  explicit LinearOperator(Matrix matrix);

  static LinearOperator identity(Eigen::Index n);
  static LinearOperator zero(Eigen::Index rows, Eigen::Index cols);

  const Matrix& matrix() const noexcept { return matrix_; }
  Eigen::Index domain_dim() const noexcept { return matrix_.cols(); }
  Eigen::Index codomain_dim() const noexcept { return matrix_.rows(); }
  bool is_square() const noexcept { return matrix_.rows() == matrix_.cols(); }

  Vector apply(const Vector& x) const;
  Vector operator()(const Vector& x) const { return apply(x); }

  LinearOperator transpose() const { return LinearOperator(matrix_.transpose()); }
  /// (A + A^T)/2; requires a square operator.
  Matrix symmetric_part() const;

 private:
  Matrix matrix_;
};

/// Closed subspace of R^ambient_dim spanned by the orthonormal columns of `basis`.
class Subspace {
 public:
  /// Validates B^T B = I to 1e-12 entrywise.
  explicit Subspace(Matrix basis);

  static Subspace whole(Eigen::Index n);
  static Subspace zero(Eigen::Index n);

  const Matrix& basis() const noexcept { return basis_; }
  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
  Eigen::Index rank() const noexcept { return basis_.cols(); }

  /// Basis coordinates B^T x.
  Vector coordinates(const Vector& x) const;
  /// Ambient point B c.
  Vector embed(const Vector& coords) const;

 private:
  Matrix basis_;
};

/// Orthonormal basis of ran(A); singular directions with sigma <= rank_tol * sigma_max are dropped.
Subspace orthonormal_range(const LinearOperator& a, double rank_tol = kDefaultRankTol);

/// Orthogonal projection B B^T x.
Vector project_onto(const Subspace& y, const Vector& x);

/// Largest singular value.
double operator_norm(const LinearOperator& a);

/// Smallest singular value.
double min_singular_value(const LinearOperator& a);

/// Largest eigenvalue of (A + A^T)/2, i.e. sup over unit y of <y, A y>.
double max_sym_eigenvalue(const LinearOperator& a);
double max_sym_eigenvalue(const Matrix& a);

/// Two-sided inverse. Throws SingularityError when sigma_min/sigma_max <= cond_tol.
LinearOperator invert(const LinearOperator& a, double cond_tol = kDefaultCondTol);

}  // namespace touchpoint::hilbert
