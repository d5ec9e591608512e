#pragma once

// Touching point of a maximally monotone M and a linear Q with
// <y, Q y> + lambda |y|^2 <= 0: the unique (d, e) with e = Q d and e in M d.
//
// -Q is mu-strongly monotone with mu = lambda / (1 + |Q|^2) and Lipschitz with
// beta = |Q|, so the forward-backward map
//
//     y  ->  J_{gamma M}(y + gamma Q y)
//
// is a contraction with factor sqrt(1 - 2 gamma mu + gamma^2 beta^2) for
// gamma in (0, 2 mu / beta^2). Its fixed points are exactly {y : Q y in M y}.

#include <cstdint>
#include <optional>

#include "touchpoint/hilbert.hpp"
#include "touchpoint/monotone.hpp"
#include "touchpoint/report.hpp"

namespace touchpoint::touching {

using hilbert::LinearOperator;
using hilbert::Vector;
using monotone::ResolventOracle;

struct TouchOptions {
  /// Stop once both the displacement and the estimated distance to the fixed
  /// point, step * r / (1 - r) with r the recent displacement ratio, are below
  /// tol * max(1, |y|).
  double tol = 1e-10;
  int max_iter = 100000;
  /// Step size; nullopt selects mu / beta^2.
  std::optional<double> gamma;
  /// Starting point; nullopt starts at 0.
  std::optional<Vector> initial;
};

struct TouchResult {
  Vector d;
  Vector e;
  double graph_residual = 0.0;
  int iterations = 0;
  double gamma = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  /// sqrt(1 - 2 gamma mu + gamma^2 beta^2).
  double contraction_bound = 0.0;
  /// Largest observed ratio of successive displacements (0 if never measured).
  double max_contraction_ratio = 0.0;
};

/// |e - Q d| + |J_{gamma M}(d + gamma e) - d|.
double graph_residual(const ResolventOracle& m, const LinearOperator& q, const Vector& d, const Vector& e,
                      double gamma);

/// Unique element of G(M) and G(Q). Throws PreconditionError when
/// <y,Qy> + lambda|y|^2 <= 0 fails, ParameterError for an inadmissible gamma,
/// ConvergenceError at the iteration cap.
TouchResult touch(const ResolventOracle& m, const LinearOperator& q, double lambda, const TouchOptions& options = {});

/// Unique fixed point e of M T, i.e. e in M(T e), for bijective T with
/// <x, T x> + lambda |T x|^2 <= 0. Solved as the touching point of M and
/// Q = T^{-1}; the result has d = T e.
TouchResult fixed_point(const ResolventOracle& m, const LinearOperator& t, double lambda,
                        const TouchOptions& options = {});

/// Reruns `touch` from `restarts` seeded random starting points and checks they
/// agree with each other on d, plus the graph residual of `result` itself.
/// Failed restarts are reported, never thrown.
VerificationReport verify_touch(const ResolventOracle& m, const LinearOperator& q, const TouchResult& result,
                                int restarts, std::uint64_t seed = 0, const TouchOptions& options = {});

}  // namespace touchpoint::touching
