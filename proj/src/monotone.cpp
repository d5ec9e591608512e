#include "touchpoint/monotone.hpp"

#include <cmath>
#include <string>

#include "touchpoint/errors.hpp"

namespace touchpoint::monotone {

using hilbert::Matrix;
using hilbert::require_dim;
using hilbert::require_finite;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(std::string(what) + " must be positive and finite, got " + std::to_string(value));
  }
}

}  // namespace

ResolventOracle ResolventOracle::subdifferential(convex::ProxFunction f) {
  const auto n = f.ambient_dim();
  return ResolventOracle(Subdifferential{std::move(f)}, n);
}

ResolventOracle ResolventOracle::linear_monotone(LinearOperator a) {
  if (!a.is_square()) throw InputError("linear_monotone: operator must be square");
  const Matrix neg = -a.matrix();
  const double worst = hilbert::max_sym_eigenvalue(neg);
  if (worst > kSpectralSlack) {
    throw PreconditionError("linear_monotone: operator is not monotone (lambda_max(sym(-A)) = " +
                            std::to_string(worst) + ")");
  }
  const auto n = a.domain_dim();
  return ResolventOracle(LinearMonotone{std::move(a)}, n);
}

ResolventOracle ResolventOracle::subspace_restricted(convex::ProxFunction f, Subspace y, SumProxOptions inner) {
  if (f.ambient_dim() != y.ambient_dim()) throw InputError("subspace_restricted: function/subspace dimension mismatch");
  if (y.rank() == 0) throw InputError("subspace_restricted: zero subspace");
  require_positive(inner.tol, "subspace_restricted: inner tolerance");
  if (inner.max_iter <= 0) throw ParameterError("subspace_restricted: inner iteration cap must be positive");
  const auto n = y.rank();
  return ResolventOracle(SubspaceRestricted{std::move(f), std::move(y), inner}, n);
}

std::string_view ResolventOracle::kind_name() const noexcept {
  return std::visit(overloaded{[](const Subdifferential&) { return std::string_view("subdifferential"); },
                               [](const LinearMonotone&) { return std::string_view("linear_monotone"); },
                               [](const SubspaceRestricted&) { return std::string_view("subspace_restricted"); }},
                    kind_);
}

Vector resolvent(const ResolventOracle& m, double lambda, const Vector& x) {
  require_positive(lambda, "resolvent: lambda");
  require_dim(x, m.ambient_dim(), "resolvent");
  require_finite(x, "resolvent");
  return std::visit(
      overloaded{[&](const ResolventOracle::Subdifferential& s) -> Vector { return convex::prox(s.f, lambda, x); },
                 [&](const ResolventOracle::LinearMonotone& l) -> Vector {
                   const auto n = l.a.domain_dim();
                   const Matrix system = Matrix::Identity(n, n) + lambda * l.a.matrix();
                   return system.partialPivLu().solve(x);
                 },
                 [&](const ResolventOracle::SubspaceRestricted& r) -> Vector {
                   // B orthonormal: |Bc - Bc'| = |c - c'|, so the coordinate prox is
                   // the ambient constrained prox read back in coordinates.
                   const Vector ambient = r.y.embed(x);
                   try {
                     return r.y.coordinates(sum_prox(r.f, r.y, lambda, ambient, r.inner.tol, r.inner.max_iter));
                   } catch (const ConvergenceError& e) {
                     throw ConvergenceError(std::string("resolvent of restricted subdifferential: ") + e.what(),
                                            e.residual(), e.iterations());
                   }
                 }},
      m.kind());
}

Vector minty_point(const ResolventOracle& m, double mu) {
  require_positive(mu, "minty_point: mu");
  return resolvent(m, 1.0 / mu, Vector::Zero(m.ambient_dim()));
}

double inclusion_residual(const ResolventOracle& m, const Vector& y, const Vector& v) {
  require_dim(y, m.ambient_dim(), "inclusion_residual");
  require_dim(v, m.ambient_dim(), "inclusion_residual");
  if (const auto* l = std::get_if<ResolventOracle::LinearMonotone>(&m.kind())) {
    return (l->a.apply(y) - v).norm();
  }
  return (resolvent(m, 1.0, y + v) - y).norm();
}

UnmonotoneCheck is_mu_unmonotone(const LinearOperator& q, double mu) {
  if (!q.is_square()) throw InputError("is_mu_unmonotone: operator must be square");
  require_positive(mu, "is_mu_unmonotone: mu");
  const Matrix& a = q.matrix();
  const auto n = a.rows();
  const Matrix form = q.symmetric_part() + mu * (Matrix::Identity(n, n) + a.transpose() * a);
  const double norm_q = hilbert::operator_norm(q);
  const double eig = hilbert::max_sym_eigenvalue(form);
  const bool holds = eig <= kSpectralSlack * (1.0 + norm_q * norm_q);
  return UnmonotoneCheck{holds, UnmonotoneCertificate{mu, eig, norm_q}};
}

double modulus_from_lambda(const LinearOperator& q, double lambda) {
  if (!q.is_square()) throw InputError("modulus_from_lambda: operator must be square");
  require_positive(lambda, "modulus_from_lambda: lambda");
  const double top = hilbert::max_sym_eigenvalue(q);
  if (top > -lambda + kSpectralSlack) {
    throw PreconditionError("modulus_from_lambda: <y,Qy> + lambda|y|^2 <= 0 fails; lambda_max(sym Q) = " +
                            std::to_string(top) + " exceeds -lambda = " + std::to_string(-lambda));
  }
  const double norm_q = hilbert::operator_norm(q);
  return lambda / (1.0 + norm_q * norm_q);
}

SumProxResult sum_prox_detailed(const convex::ProxFunction& g1, const Subspace& y, double lambda, const Vector& v,
                                double tol, int max_iter) {
  require_positive(lambda, "sum_prox: lambda");
  require_positive(tol, "sum_prox: tol");
  if (max_iter <= 0) throw ParameterError("sum_prox: max_iter must be positive");
  if (g1.ambient_dim() != y.ambient_dim()) throw InputError("sum_prox: function/subspace dimension mismatch");
  require_dim(v, y.ambient_dim(), "sum_prox");
  require_finite(v, "sum_prox");

  const double scale = std::max(1.0, v.norm());
  Vector x = v;
  Vector p = Vector::Zero(v.size());
  Vector q = Vector::Zero(v.size());
  double residual = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    const Vector w = convex::prox(g1, lambda, x + p);
    p = x + p - w;
    const Vector x_next = hilbert::project_onto(y, w + q);
    q = w + q - x_next;
    // Both the displacement and the disagreement between the two steps must
    // vanish; on an empty intersection the latter stalls at the gap.
    residual = std::max((x_next - x).norm(), (w - x_next).norm());
    x = x_next;
    if (residual <= tol * scale) {
      return SumProxResult{std::move(x), p / lambda, k, residual};
    }
  }
  throw ConvergenceError("sum_prox: no convergence after " + std::to_string(max_iter) +
                             " iterations (last residual " + std::to_string(residual) + ")",
                         residual, max_iter);
}

Vector sum_prox(const convex::ProxFunction& g1, const Subspace& y, double lambda, const Vector& v, double tol,
                int max_iter) {
  return sum_prox_detailed(g1, y, lambda, v, tol, max_iter).z;
}

}  // namespace touchpoint::monotone
