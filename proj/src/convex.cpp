#include "touchpoint/convex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "touchpoint/errors.hpp"

namespace touchpoint::convex {

using hilbert::Matrix;
using hilbert::require_dim;
using hilbert::require_finite;

namespace {

// Relative slack for deciding whether a direction lies in the barrier cone of
// a halfspace or affine set (where the support function is finite).
constexpr double kDirectionTol = 1e-8;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive_lambda(double lambda, const char* what) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError(std::string(what) + ": lambda must be positive and finite, got " +
                         std::to_string(lambda));
  }
}

double scale_of(const Vector& v) { return std::max(1.0, v.norm()); }

}  // namespace

double ExtendedReal::value() const {
  if (infinite_) throw std::logic_error("ExtendedReal::value on +infinity");
  return value_;
}

double ExtendedReal::as_double() const noexcept {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

// ---------------------------------------------------------------------------
// ConvexSet

ConvexSet ConvexSet::ball(Vector center, double radius) {
  require_finite(center, "ball center");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InputError("ball: radius must be finite and nonnegative");
  }
  const auto n = center.size();
  if (n == 0) throw InputError("ball: empty center");
  return ConvexSet(Ball{std::move(center), radius}, n);
}

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw InputError("box: lower/upper dimension mismatch");
  if (lower.size() == 0) throw InputError("box: empty bounds");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i))) throw InputError("box: NaN bound");
    if (lower(i) == std::numeric_limits<double>::infinity() ||
        upper(i) == -std::numeric_limits<double>::infinity()) {
      throw InputError("box: empty coordinate interval");
    }
    if (lower(i) > upper(i)) throw InputError("box: lower exceeds upper in coordinate " + std::to_string(i));
  }
  const auto n = lower.size();
  return ConvexSet(Box{std::move(lower), std::move(upper)}, n);
}

ConvexSet ConvexSet::halfspace(Vector normal, double offset) {
  require_finite(normal, "halfspace normal");
  if (!std::isfinite(offset)) throw InputError("halfspace: offset must be finite");
  if (normal.size() == 0) throw InputError("halfspace: empty normal");
  if (normal.norm() == 0.0) throw InputError("halfspace: normal must be nonzero");
  const auto n = normal.size();
  return ConvexSet(Halfspace{std::move(normal), offset}, n);
}

ConvexSet ConvexSet::affine(Vector basepoint, hilbert::Subspace directions) {
  require_finite(basepoint, "affine basepoint");
  require_dim(basepoint, directions.ambient_dim(), "affine");
  if (basepoint.size() == 0) throw InputError("affine: empty basepoint");
  const auto n = basepoint.size();
  return ConvexSet(Affine{std::move(basepoint), std::move(directions)}, n);
}

ConvexSet ConvexSet::affine_span(Vector basepoint, const Matrix& spanning) {
  if (spanning.rows() != basepoint.size()) throw InputError("affine: spanning vector dimension mismatch");
  hilbert::Subspace dirs = spanning.cols() == 0
                               ? hilbert::Subspace::zero(basepoint.size())
                               : hilbert::orthonormal_range(hilbert::LinearOperator(spanning));
  return affine(std::move(basepoint), std::move(dirs));
}

ConvexSet ConvexSet::singleton(Vector point) {
  require_finite(point, "singleton");
  if (point.size() == 0) throw InputError("singleton: empty point");
  const auto n = point.size();
  return ConvexSet(Singleton{std::move(point)}, n);
}

ConvexSet ConvexSet::whole_space(Eigen::Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return box(Vector::Constant(n, -inf), Vector::Constant(n, inf));
}

std::string_view ConvexSet::kind_name() const noexcept {
  return std::visit(overloaded{[](const Ball&) { return std::string_view("ball"); },
                               [](const Box&) { return std::string_view("box"); },
                               [](const Halfspace&) { return std::string_view("halfspace"); },
                               [](const Affine&) { return std::string_view("affine"); },
                               [](const Singleton&) { return std::string_view("singleton"); }},
                    kind_);
}

Vector project(const ConvexSet& c, const Vector& x) {
  require_dim(x, c.ambient_dim(), "project");
  require_finite(x, "project");
  return std::visit(
      overloaded{
          [&](const Ball& b) -> Vector {
            const Vector offset = x - b.center;
            const double dist = offset.norm();
            if (dist <= b.radius) return x;
            return b.center + (b.radius / dist) * offset;
          },
          [&](const Box& b) -> Vector { return x.cwiseMax(b.lower).cwiseMin(b.upper); },
          [&](const Halfspace& h) -> Vector {
            const double excess = h.normal.dot(x) - h.offset;
            if (excess <= 0.0) return x;
            return x - (excess / h.normal.squaredNorm()) * h.normal;
          },
          [&](const Affine& a) -> Vector {
            return a.basepoint + hilbert::project_onto(a.directions, x - a.basepoint);
          },
          [&](const Singleton& s) -> Vector { return s.point; }},
      c.kind());
}

bool contains(const ConvexSet& c, const Vector& x, double tol) {
  return (x - project(c, x)).norm() <= tol * scale_of(x);
}

ExtendedReal support_value(const ConvexSet& c, const Vector& u) {
  require_dim(u, c.ambient_dim(), "support_value");
  require_finite(u, "support_value");
  return std::visit(
      overloaded{
          [&](const Ball& b) -> ExtendedReal { return b.center.dot(u) + b.radius * u.norm(); },
          [&](const Box& b) -> ExtendedReal {
            double total = 0.0;
            for (Eigen::Index i = 0; i < u.size(); ++i) {
              if (u(i) == 0.0) continue;
              const double bound = u(i) > 0.0 ? b.upper(i) : b.lower(i);
              if (!std::isfinite(bound)) return ExtendedReal::infinity();
              total += bound * u(i);
            }
            return total;
          },
          [&](const Halfspace& h) -> ExtendedReal {
            // Finite only along the ray {t * normal : t >= 0}.
            const double t = h.normal.dot(u) / h.normal.squaredNorm();
            const double slack = kDirectionTol * scale_of(u);
            if ((u - t * h.normal).norm() > slack) return ExtendedReal::infinity();
            if (t * h.normal.norm() < -slack) return ExtendedReal::infinity();
            return std::max(t, 0.0) * h.offset;
          },
          [&](const Affine& a) -> ExtendedReal {
            if (hilbert::project_onto(a.directions, u).norm() > kDirectionTol * scale_of(u)) {
              return ExtendedReal::infinity();
            }
            return a.basepoint.dot(u);
          },
          [&](const Singleton& s) -> ExtendedReal { return s.point.dot(u); }},
      c.kind());
}

// ---------------------------------------------------------------------------
// ProxFunction

ProxFunction ProxFunction::indicator(ConvexSet set) {
  const auto n = set.ambient_dim();
  return ProxFunction(Indicator{std::move(set)}, n);
}

ProxFunction ProxFunction::support(ConvexSet set) {
  const auto n = set.ambient_dim();
  return ProxFunction(Support{std::move(set)}, n);
}

ProxFunction ProxFunction::scaled_square(double weight, Eigen::Index dim) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ParameterError("scaled_square: weight must be positive and finite");
  }
  if (dim <= 0) throw InputError("scaled_square: dimension must be positive");
  return ProxFunction(ScaledSquare{weight, dim}, dim);
}

ProxFunction ProxFunction::separable_sum(std::vector<ProxFunction> blocks) {
  if (blocks.empty()) throw InputError("separable_sum: no blocks");
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.ambient_dim();
  return ProxFunction(SeparableSum{std::move(blocks)}, n);
}

ProxFunction ProxFunction::translated(ProxFunction base, Vector shift) {
  require_dim(shift, base.ambient_dim(), "translated");
  require_finite(shift, "translated");
  const auto n = base.ambient_dim();
  return ProxFunction(Translated{std::make_shared<const ProxFunction>(std::move(base)), std::move(shift)}, n);
}

ProxFunction ProxFunction::zero(Eigen::Index dim) { return indicator(ConvexSet::whole_space(dim)); }

namespace {

// Applies `per_block(block, segment)` over consecutive coordinate segments.
template <class Fn>
void for_each_block(const ProxFunction::SeparableSum& s, Eigen::Index total, Fn&& per_block) {
  Eigen::Index offset = 0;
  for (const auto& block : s.blocks) {
    per_block(block, offset, block.ambient_dim());
    offset += block.ambient_dim();
  }
  if (offset != total) throw std::logic_error("separable_sum: block sizes do not cover the space");
}

}  // namespace

Vector prox(const ProxFunction& f, double lambda, const Vector& x) {
  require_positive_lambda(lambda, "prox");
  require_dim(x, f.ambient_dim(), "prox");
  require_finite(x, "prox");
  return std::visit(
      overloaded{
          [&](const ProxFunction::Indicator& ind) -> Vector { return project(ind.set, x); },
          [&](const ProxFunction::Support& sup) -> Vector {
            // Moreau: prox_{lambda sigma_C}(x) = x - lambda P_C(x / lambda).
            return x - lambda * project(sup.set, x / lambda);
          },
          [&](const ProxFunction::ScaledSquare& sq) -> Vector { return x / (1.0 + lambda * sq.weight); },
          [&](const ProxFunction::SeparableSum& sum) -> Vector {
            Vector out(x.size());
            for_each_block(sum, x.size(), [&](const ProxFunction& block, Eigen::Index at, Eigen::Index len) {
              out.segment(at, len) = prox(block, lambda, x.segment(at, len));
            });
            return out;
          },
          [&](const ProxFunction::Translated& t) -> Vector {
            return t.shift + prox(*t.base, lambda, x - t.shift);
          }},
      f.kind());
}

ExtendedReal evaluate(const ProxFunction& f, const Vector& x) {
  require_dim(x, f.ambient_dim(), "evaluate");
  require_finite(x, "evaluate");
  return std::visit(
      overloaded{
          [&](const ProxFunction::Indicator& ind) -> ExtendedReal {
            return contains(ind.set, x) ? ExtendedReal(0.0) : ExtendedReal::infinity();
          },
          [&](const ProxFunction::Support& sup) -> ExtendedReal { return support_value(sup.set, x); },
          [&](const ProxFunction::ScaledSquare& sq) -> ExtendedReal { return 0.5 * sq.weight * x.squaredNorm(); },
          [&](const ProxFunction::SeparableSum& sum) -> ExtendedReal {
            ExtendedReal total = 0.0;
            for_each_block(sum, x.size(), [&](const ProxFunction& block, Eigen::Index at, Eigen::Index len) {
              total += evaluate(block, x.segment(at, len));
            });
            return total;
          },
          [&](const ProxFunction::Translated& t) -> ExtendedReal { return evaluate(*t.base, x - t.shift); }},
      f.kind());
}

ExtendedReal conjugate_value(const ProxFunction& f, const Vector& u) {
  require_dim(u, f.ambient_dim(), "conjugate_value");
  require_finite(u, "conjugate_value");
  return std::visit(
      overloaded{
          [&](const ProxFunction::Indicator& ind) -> ExtendedReal { return support_value(ind.set, u); },
          [&](const ProxFunction::Support& sup) -> ExtendedReal {
            return contains(sup.set, u) ? ExtendedReal(0.0) : ExtendedReal::infinity();
          },
          [&](const ProxFunction::ScaledSquare& sq) -> ExtendedReal { return 0.5 / sq.weight * u.squaredNorm(); },
          [&](const ProxFunction::SeparableSum& sum) -> ExtendedReal {
            ExtendedReal total = 0.0;
            for_each_block(sum, u.size(), [&](const ProxFunction& block, Eigen::Index at, Eigen::Index len) {
              total += conjugate_value(block, u.segment(at, len));
            });
            return total;
          },
          [&](const ProxFunction::Translated& t) -> ExtendedReal {
            return conjugate_value(*t.base, u) + ExtendedReal(t.shift.dot(u));
          }},
      f.kind());
}

std::optional<ProxFunction> conjugate(const ProxFunction& f) {
  return std::visit(
      overloaded{
          [&](const ProxFunction::Indicator& ind) -> std::optional<ProxFunction> {
            return ProxFunction::support(ind.set);
          },
          [&](const ProxFunction::Support& sup) -> std::optional<ProxFunction> {
            return ProxFunction::indicator(sup.set);
          },
          [&](const ProxFunction::ScaledSquare& sq) -> std::optional<ProxFunction> {
            return ProxFunction::scaled_square(1.0 / sq.weight, sq.dim);
          },
          [&](const ProxFunction::SeparableSum& sum) -> std::optional<ProxFunction> {
            std::vector<ProxFunction> blocks;
            blocks.reserve(sum.blocks.size());
            for (const auto& b : sum.blocks) {
              auto c = conjugate(b);
              if (!c) return std::nullopt;
              blocks.push_back(std::move(*c));
            }
            return ProxFunction::separable_sum(std::move(blocks));
          },
          [&](const ProxFunction::Translated&) -> std::optional<ProxFunction> { return std::nullopt; }},
      f.kind());
}

}  // namespace touchpoint::convex
