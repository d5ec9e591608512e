#pragma once

// Maximally monotone multifunctions, represented exclusively through their
// resolvents J_{lambda M} = (I + lambda M)^{-1}, together with the spectral
// certificate for mu-unmonotone linear operators.

#include <string_view>
#include <variant>

#include "touchpoint/convex.hpp"
#include "touchpoint/hilbert.hpp"

namespace touchpoint::monotone {

using hilbert::LinearOperator;
using hilbert::Subspace;
using hilbert::Vector;

/// Slack used by every spectral gate in this module.
inline constexpr double kSpectralSlack = 1e-12;

struct SumProxOptions {
  double tol = 1e-11;
  int max_iter = 200000;
};

class ResolventOracle {
 public:
  struct Subdifferential {
    convex::ProxFunction f;
  };
  struct LinearMonotone {
    LinearOperator a;
  };
  /// d(f|_Y) acting on the basis coordinates of Y.
  struct SubspaceRestricted {
    convex::ProxFunction f;
    Subspace y;
    SumProxOptions inner;
  };
  using Kind = std::variant<Subdifferential, LinearMonotone, SubspaceRestricted>;

  static ResolventOracle subdifferential(convex::ProxFunction f);
  /// Throws PreconditionError unless the symmetric part of `a` is positive semidefinite.
  static ResolventOracle linear_monotone(LinearOperator a);
  /// Throws InputError when f and y live in different ambient spaces.
  static ResolventOracle subspace_restricted(convex::ProxFunction f, Subspace y, SumProxOptions inner = {});

  const Kind& kind() const noexcept { return kind_; }
  /// Dimension of the space the multifunction acts on (rank of Y for the restricted kind).
  Eigen::Index ambient_dim() const noexcept { return dim_; }
  std::string_view kind_name() const noexcept;

 private:
  ResolventOracle(Kind kind, Eigen::Index dim) : kind_(std::move(kind)), dim_(dim) {}

  Kind kind_;
  Eigen::Index dim_;
};

/// The unique y with x in y + lambda M y.
Vector resolvent(const ResolventOracle& m, double lambda, const Vector& x);

/// The unique y with 0 in mu y + M y, i.e. J_{M/mu}(0).
Vector minty_point(const ResolventOracle& m, double mu);

/// How far (y, v) is from the graph of M. Exact for the linear kind; otherwise
/// |J_1(y + v) - y|, which vanishes iff v is in M y.
double inclusion_residual(const ResolventOracle& m, const Vector& y, const Vector& v);

struct UnmonotoneCertificate {
  double mu;
  /// lambda_max(sym(Q) + mu (I + Q^T Q)).
  double max_eig;
  double operator_norm_q;
};

struct UnmonotoneCheck {
  bool holds;
  UnmonotoneCertificate certificate;
};

/// Exact spectral test of
///   <dy, Q dy> + mu (|dy|^2 + |Q dy|^2) <= 0  for all dy.
/// The eigenvalue is compared against kSpectralSlack * (1 + |Q|^2), which is
/// the eigenvalue change caused by perturbing mu by kSpectralSlack.
UnmonotoneCheck is_mu_unmonotone(const LinearOperator& q, double mu);

/// mu = lambda / (1 + |Q|^2) for Q with <y, Q y> + lambda |y|^2 <= 0.
/// Throws PreconditionError when that inequality fails.
double modulus_from_lambda(const LinearOperator& q, double lambda);

struct SumProxResult {
  Vector z;
  /// Element of d g1(z) recovered from the iteration.
  Vector subgradient;
  int iterations;
  double residual;
};

/// prox of lambda (g1 + indicator of Y) at v, by the Dykstra-like proximal
/// splitting. Throws ConvergenceError when max_iter is reached.
SumProxResult sum_prox_detailed(const convex::ProxFunction& g1, const Subspace& y, double lambda, const Vector& v,
                                double tol = SumProxOptions{}.tol, int max_iter = SumProxOptions{}.max_iter);

Vector sum_prox(const convex::ProxFunction& g1, const Subspace& y, double lambda, const Vector& v,
                double tol = SumProxOptions{}.tol, int max_iter = SumProxOptions{}.max_iter);

}  // namespace touchpoint::monotone
