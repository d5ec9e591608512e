#pragma once

// Convex sets with closed-form nearest-point maps, and the prox-friendly
// convex functions built from them (indicators, support functions, scaled
// squared norms, block-separable sums). Every function here is proper,
// convex and lower semicontinuous by construction.

#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "touchpoint/hilbert.hpp"

namespace touchpoint::convex {

using hilbert::Vector;

inline constexpr double kMembershipTol = 1e-9;

/// Real number or +infinity. +infinity is a flag, never a large double.
class ExtendedReal {
 public:
  constexpr ExtendedReal(double value) : value_(value) {}  // NOLINT(implicit)

  static constexpr ExtendedReal infinity() {
    ExtendedReal r(0.0);
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const noexcept { return !infinite_; }
  /// Finite value; throws std::logic_error on +infinity.
  double value() const;
  /// Finite value, or IEEE +inf for reporting.
  double as_double() const noexcept;

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtendedReal(a.value_ + b.value_);
  }
  ExtendedReal& operator+=(ExtendedReal other) { return *this = *this + other; }
  friend bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

struct Ball {
  Vector center;
  double radius;
};

/// Componentwise bounds; entries may be -inf / +inf.
struct Box {
  Vector lower;
  Vector upper;
};

/// {x : <normal, x> <= offset}
struct Halfspace {
  Vector normal;
  double offset;
};

/// basepoint + span(directions)
struct Affine {
  Vector basepoint;
  hilbert::Subspace directions;
};

struct Singleton {
  Vector point;
};

/// Nonempty closed convex subset of R^n.
class ConvexSet {
 public:
  using Kind = std::variant<Ball, Box, Halfspace, Affine, Singleton>;

  static ConvexSet ball(Vector center, double radius);
  static ConvexSet box(Vector lower, Vector upper);
  static ConvexSet halfspace(Vector normal, double offset);
  static ConvexSet affine(Vector basepoint, hilbert::Subspace directions);
  /// Affine set through `basepoint` spanned by the columns of `spanning` (any rank).
  static ConvexSet affine_span(Vector basepoint, const hilbert::Matrix& spanning);
  static ConvexSet singleton(Vector point);
  /// All of R^n, as an unbounded box.
  static ConvexSet whole_space(Eigen::Index n);

  const Kind& kind() const noexcept { return kind_; }
  Eigen::Index ambient_dim() const noexcept { return dim_; }
  std::string_view kind_name() const noexcept;

 private:
  ConvexSet(Kind kind, Eigen::Index dim) : kind_(std::move(kind)), dim_(dim) {}

  Kind kind_;
  Eigen::Index dim_;
};

/// Nearest point of C to x.
Vector project(const ConvexSet& c, const Vector& x);

/// dist(x, C) <= tol * max(1, |x|).
bool contains(const ConvexSet& c, const Vector& x, double tol = kMembershipTol);

/// sigma_C(u) = sup_{c in C} <c, u>.
ExtendedReal support_value(const ConvexSet& c, const Vector& u);

/// Proper convex lsc function with an exact prox.
class ProxFunction {
 public:
  struct Indicator {
    ConvexSet set;
  };
  struct Support {
    ConvexSet set;
  };
  /// (weight/2) |x|^2 on R^dim, weight > 0.
  struct ScaledSquare {
    double weight;
    Eigen::Index dim;
  };
  /// Sum of functions on consecutive coordinate blocks, in order.
  struct SeparableSum {
    std::vector<ProxFunction> blocks;
  };
  /// x -> base(x - shift).
  struct Translated {
    std::shared_ptr<const ProxFunction> base;
    Vector shift;
  };
  using Kind = std::variant<Indicator, Support, ScaledSquare, SeparableSum, Translated>;

  static ProxFunction indicator(ConvexSet set);
  static ProxFunction support(ConvexSet set);
  static ProxFunction scaled_square(double weight, Eigen::Index dim);
  static ProxFunction separable_sum(std::vector<ProxFunction> blocks);
  static ProxFunction translated(ProxFunction base, Vector shift);
  /// The zero function, i.e. the indicator of the whole space.
  static ProxFunction zero(Eigen::Index dim);

  const Kind& kind() const noexcept { return kind_; }
  Eigen::Index ambient_dim() const noexcept { return dim_; }

 private:
  ProxFunction(Kind kind, Eigen::Index dim) : kind_(std::move(kind)), dim_(dim) {}

  Kind kind_;
  Eigen::Index dim_;
};

/// argmin_z f(z) + |z - x|^2 / (2 lambda). Throws ParameterError for lambda <= 0.
Vector prox(const ProxFunction& f, double lambda, const Vector& x);

ExtendedReal evaluate(const ProxFunction& f, const Vector& x);

/// f*(u) in closed form.
ExtendedReal conjugate_value(const ProxFunction& f, const Vector& u);

/// f* as a ProxFunction when it belongs to the same family. Translated terms
/// conjugate to tilted functions, which are not representable; returns nullopt.
std::optional<ProxFunction> conjugate(const ProxFunction& f);

}  // namespace touchpoint::convex
