#include "touchpoint/cycles.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "touchpoint/errors.hpp"

namespace touchpoint::cycles {

using hilbert::Matrix;

namespace {

constexpr double kStructureTol = 1e-12;
constexpr double kBilinearTol = 1e-10;
constexpr double kBijectivityTol = 1e-10;
constexpr int kStructureSamples = 1000;

constexpr double kMembershipResidualTol = 1e-9;
constexpr double kIdentityTol = 1e-6;
constexpr double kConjugateGapTol = 1e-4;
constexpr int kAscentDirections = 1000;
constexpr int kGoldenSteps = 80;

Vector gaussian(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// Maximizes a concave g on [-s, s]; returns the argmax estimate.
template <class Fn>
double golden_section_max(Fn&& g, double s) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = -s;
  double b = s;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int k = 0; k < kGoldenSteps; ++k) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + ratio * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - ratio * (b - a);
      g1 = g(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

LinearOperator cyclic_shift(int n_blocks, Eigen::Index m) {
  if (n_blocks <= 0 || m <= 0) throw InputError("cyclic_shift: block count and size must be positive");
  const Eigen::Index n = n_blocks * m;
  Matrix r = Matrix::Zero(n, n);
  // (R x)_i = x_{i-1}
  for (int i = 0; i < n_blocks; ++i) {
    const int from = (i + n_blocks - 1) % n_blocks;
    r.block(i * m, from * m, m, m).setIdentity();
  }
  return LinearOperator(std::move(r));
}

double isometry_defect(const LinearOperator& a) {
  if (!a.is_square()) throw InputError("isometry_defect: operator must be square");
  const Matrix& m = a.matrix();
  if (m.size() == 0) return 0.0;
  return (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

CycleProblem build_problem(std::vector<ConvexSet> sets, Eigen::Index m) {
  if (sets.size() < 2) {
    throw DegenerateProblemError("build_problem: need at least two sets, got " + std::to_string(sets.size()));
  }
  if (m <= 0) throw InputError("build_problem: base dimension must be positive");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].ambient_dim() != m) {
      throw InputError("build_problem: set " + std::to_string(i) + " has dimension " +
                       std::to_string(sets[i].ambient_dim()) + ", expected " + std::to_string(m));
    }
  }
  const int count = static_cast<int>(sets.size());
  const Eigen::Index n = count * m;

  LinearOperator r = cyclic_shift(count, m);
  LinearOperator s(r.matrix() - Matrix::Identity(n, n));
  Subspace y = hilbert::orthonormal_range(s);
  LinearOperator s_on_y(y.basis().transpose() * s.matrix() * y.basis());

  std::vector<ProxFunction> indicators;
  std::vector<ProxFunction> supports;
  for (const auto& c : sets) {
    indicators.push_back(ProxFunction::indicator(c));
    supports.push_back(ProxFunction::support(c));
  }

  VerificationReport structure;
  structure.add("isometry_defect_R", isometry_defect(r), kStructureTol);

  std::mt19937_64 rng(0x5eed);
  double norm_defect = 0.0;
  double bilinear_defect = 0.0;
  for (int k = 0; k < kStructureSamples; ++k) {
    const Vector x = gaussian(rng, n);
    const Vector sx = s.apply(x);
    const double xx = x.squaredNorm();
    norm_defect = std::max(norm_defect, std::abs((sx + x).norm() - x.norm()) / std::max(1.0, x.norm()));
    bilinear_defect = std::max(bilinear_defect, std::abs(x.dot(sx) + 0.5 * sx.squaredNorm()) / xx);
  }
  structure.add("sampled_isometry_defect", norm_defect, kStructureTol);
  structure.add("sampled_bilinear_identity", bilinear_defect, kBilinearTol);
  const Eigen::Index expected_rank = (count - 1) * m;
  structure.add("rank_defect", static_cast<double>(std::abs(y.rank() - expected_rank)), 0.0);
  const double sigma_min = hilbert::min_singular_value(s_on_y);
  structure.record("sigma_min_S_on_Y", sigma_min);

  if (y.rank() != expected_rank) {
    throw PreconditionError("build_problem: rank(Y) = " + std::to_string(y.rank()) + ", expected " +
                            std::to_string(expected_rank));
  }
  if (!(sigma_min > kBijectivityTol)) {
    throw SingularityError("build_problem: S restricted to Y is not bijective (sigma_min = " +
                           std::to_string(sigma_min) + ")");
  }
  if (!structure.passed()) throw PreconditionError("build_problem: structural check failed");

  return CycleProblem{m,
                      std::move(sets),
                      std::move(r),
                      std::move(s),
                      std::move(y),
                      std::move(s_on_y),
                      ProxFunction::separable_sum(std::move(indicators)),
                      ProxFunction::separable_sum(std::move(supports)),
                      std::move(structure)};
}

CycleSolution generalized_cycle(const CycleProblem& p, const CycleOptions& options) {
  const auto m = monotone::ResolventOracle::subspace_restricted(p.f_star, p.y, options.inner);
  touching::TouchOptions touch_options;
  touch_options.tol = options.tol;
  touch_options.max_iter = options.max_iter;
  touch_options.gamma = options.gamma;

  touching::TouchResult r;
  try {
    r = touching::fixed_point(m, p.s_on_y, 0.5, touch_options);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string("generalized_cycle: ") + e.what(), e.residual(), e.iterations());
  }

  CycleSolution sol;
  sol.e = p.y.embed(r.e);
  sol.d = p.s.apply(sol.e);
  sol.solver = std::move(r);
  sol.identity_report = verify_identities(p, sol);
  return sol;
}

std::optional<Vector> classical_cycle(const CycleProblem& p, const Vector& z0, double tol, int max_iter) {
  hilbert::require_dim(z0, p.base_dim, "classical_cycle: z0");
  hilbert::require_finite(z0, "classical_cycle: z0");
  if (!(tol > 0.0)) throw ParameterError("classical_cycle: tol must be positive");
  if (max_iter <= 0) throw ParameterError("classical_cycle: max_iter must be positive");

  auto sweep = [&](const Vector& z) {
    Vector w = z;
    for (const auto& c : p.sets) w = convex::project(c, w);
    return w;
  };

  Vector z = z0;
  bool converged = false;
  for (int k = 0; k < max_iter; ++k) {
    Vector next = sweep(z);
    const double step = (next - z).norm();
    z = std::move(next);
    if (step <= tol * std::max(1.0, z.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) return std::nullopt;

  const Eigen::Index m = p.base_dim;
  const int count = p.count();
  Vector x(p.product_dim());
  Vector prev = z;
  for (int i = 0; i < count; ++i) {
    prev = convex::project(p.sets[i], prev);
    x.segment(i * m, m) = prev;
  }
  // S x in df(x)  <=>  x_i = P_{C_i}(x_{i-1}) for every i, indices cyclic.
  double defect = 0.0;
  for (int i = 0; i < count; ++i) {
    const int from = (i + count - 1) % count;
    defect = std::max(defect, (x.segment(i * m, m) - convex::project(p.sets[i], x.segment(from * m, m))).norm());
  }
  if (defect > 1e3 * tol * std::max(1.0, x.norm())) return std::nullopt;
  return x;
}

VerificationReport verify_identities(const CycleProblem& p, const CycleSolution& sol, std::uint64_t seed) {
  const Eigen::Index n = p.product_dim();
  hilbert::require_dim(sol.e, n, "verify_identities: e");
  hilbert::require_dim(sol.d, n, "verify_identities: d");

  VerificationReport report;
  const Vector se = p.s.apply(sol.e);
  const double se_scale = std::max(1.0, se.norm());

  report.add("gap_vector_consistency", (sol.d - se).norm(), kMembershipResidualTol * std::max(1.0, sol.d.norm()));
  report.add("cycle_in_Y", (sol.e - hilbert::project_onto(p.y, sol.e)).norm(),
             kMembershipResidualTol * std::max(1.0, sol.e.norm()));

  // <e, Se> = f*(Se) + (f*|_Y)*(e), evaluated from the left-hand side.
  const convex::ExtendedReal f_star_se = convex::conjugate_value(p.f, se);
  const double identity_value =
      f_star_se.is_finite() ? sol.e.dot(se) - f_star_se.value() : -std::numeric_limits<double>::infinity();
  report.record("restricted_conjugate_identity", identity_value);
  report.record("inner_product_e_Se", sol.e.dot(se));
  report.record("f_star_Se", f_star_se.as_double());

  // Independent lower bound on sup_{y in Y} <e, y> - f*(y): line searches
  // along random directions of Y starting from S e.
  auto phi = [&](const Vector& coords) {
    const Vector yv = p.y.embed(coords);
    const auto fs = convex::conjugate_value(p.f, yv);
    return fs.is_finite() ? sol.e.dot(yv) - fs.value() : -std::numeric_limits<double>::infinity();
  };
  std::mt19937_64 rng(seed);
  Vector best = p.y.coordinates(se);
  double best_value = phi(best);
  const double radius = se_scale;
  for (int k = 0; k < kAscentDirections; ++k) {
    Vector dir = gaussian(rng, p.y.rank());
    dir.normalize();
    const double t = golden_section_max([&](double s) { return phi(best + s * dir); }, radius);
    const Vector candidate = best + t * dir;
    const double value = phi(candidate);
    if (value > best_value) {
      best = candidate;
      best_value = value;
    }
  }
  const double origin_value = phi(Vector::Zero(p.y.rank()));
  const double sampled = std::max(best_value, origin_value);
  report.record("restricted_conjugate_sampled", sampled);
  report.record("ascent_displacement", (p.y.embed(best) - se).norm());
  const double gap = std::isfinite(identity_value) ? std::abs(sampled - identity_value)
                                                   : std::numeric_limits<double>::infinity();
  report.add("restricted_conjugate_gap", gap, kConjugateGapTol);

  report.add("isometry_defect", isometry_defect(LinearOperator(p.s.matrix() + Matrix::Identity(n, n))),
             kIdentityTol);

  if (sol.classical_cycle) {
    const Vector& x = *sol.classical_cycle;
    hilbert::require_dim(x, n, "verify_identities: classical cycle");
    const Vector sx = p.s.apply(x);
    report.add("qlr_residual", (sx - se).norm(), kIdentityTol * se_scale);
    const convex::ExtendedReal total =
        convex::conjugate_value(p.f, sx) + convex::ExtendedReal(0.5 * sx.squaredNorm()) + convex::evaluate(p.f, x);
    report.add("conjugate_sum_residual", std::abs(total.as_double()), kIdentityTol);
    report.record("classical_gap_norm", sx.norm());

    const convex::ExtendedReal fx = convex::evaluate(p.f, x);
    if (fx.is_finite() && std::isfinite(identity_value)) {
      const double margin = identity_value - fx.value();
      if (std::abs(margin) <= kConjugateGapTol) {
        report.note("f(x) <= (f*|_Y)*(e): indeterminate (margin " + std::to_string(margin) + ")");
      } else {
        report.note(std::string("f(x) <= (f*|_Y)*(e): ") + (margin > 0.0 ? "holds" : "fails"));
      }
    }
  } else {
    report.note("no classical cycle supplied; qlr_residual and conjugate_sum_residual not evaluated");
  }
  return report;
}

}  // namespace touchpoint::cycles
