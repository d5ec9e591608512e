#pragma once

// Generalized cycles and gap vectors of N closed convex sets C_1..C_N in R^m.
//
// The product space X = (R^m)^N carries the block cyclic shift
//   R(x_1, ..., x_N) = (x_N, x_1, ..., x_{N-1}),
// S = R - I and Y = ran(S) (the complement of the diagonal). With
// f = sum_i indicator(C_i) and f* = sum_i support(C_i), the generalized cycle
// e is the unique fixed point of d(f*|_Y) o S|_Y and d = S e is the
// generalized gap vector. A classical cycle x (x_i = P_{C_i}(x_{i-1}), indices
// cyclic) satisfies S x in df(x), and then S x = S e.

#include <cstdint>
#include <optional>
#include <vector>

#include "touchpoint/convex.hpp"
#include "touchpoint/hilbert.hpp"
#include "touchpoint/monotone.hpp"
#include "touchpoint/report.hpp"
#include "touchpoint/touching.hpp"

namespace touchpoint::cycles {

using convex::ConvexSet;
using convex::ProxFunction;
using hilbert::LinearOperator;
using hilbert::Subspace;
using hilbert::Vector;

struct CycleProblem {
  Eigen::Index base_dim;
  std::vector<ConvexSet> sets;
  LinearOperator r;
  LinearOperator s;
  Subspace y;
  /// B^T S B for the orthonormal basis B of Y.
  LinearOperator s_on_y;
  ProxFunction f;
  ProxFunction f_star;
  /// Structural checks run at construction (isometry, rank, bijectivity, sampled <x,Sx> + |Sx|^2/2 = 0).
  VerificationReport structure;

  int count() const noexcept { return static_cast<int>(sets.size()); }
  Eigen::Index product_dim() const noexcept { return base_dim * static_cast<Eigen::Index>(sets.size()); }
};

/// Block cyclic shift on (R^m)^n_blocks.
LinearOperator cyclic_shift(int n_blocks, Eigen::Index m);

/// max |A^T A - I| entrywise; zero exactly for isometries.
double isometry_defect(const LinearOperator& a);

/// Throws DegenerateProblemError for fewer than two sets, InputError for a set
/// outside R^m, PreconditionError / SingularityError when a structural check fails.
CycleProblem build_problem(std::vector<ConvexSet> sets, Eigen::Index m);

struct CycleOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  std::optional<double> gamma;
  monotone::SumProxOptions inner;
};

struct CycleSolution {
  /// Generalized cycle, X coordinates, lies in Y.
  Vector e;
  /// Generalized gap vector S e.
  Vector d;
  std::optional<Vector> classical_cycle;
  VerificationReport identity_report;
  touching::TouchResult solver;
};

/// Runs the touching solver on d(f*|_Y) and (S|_Y)^{-1} in Y coordinates with lambda = 1/2.
CycleSolution generalized_cycle(const CycleProblem& p, const CycleOptions& options = {});

/// Cyclic projections from z0 in R^m. Returns the unrolled sweep x = (x_1..x_N)
/// once the sweep map converges and S x in df(x) is confirmed; nullopt otherwise.
std::optional<Vector> classical_cycle(const CycleProblem& p, const Vector& z0, double tol = 1e-10,
                                      int max_iter = 100000);

/// Residuals of the identities tying e, S e and a classical cycle together:
///   qlr_residual             |S x - S e|                        (needs x)
///   conjugate_sum_residual   |f*(S x) + |S x|^2/2 + f(x)|       (needs x)
///   restricted_conjugate_gap sampled sup_{y in Y} <e,y> - f*(y)  minus  <e,Se> - f*(Se)
///   isometry_defect          of S + I
/// plus e in Y and d = S e. Never throws on numerical findings.
VerificationReport verify_identities(const CycleProblem& p, const CycleSolution& sol, std::uint64_t seed = 0);

}  // namespace touchpoint::cycles
