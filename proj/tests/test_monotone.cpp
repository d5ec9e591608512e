#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "touchpoint/errors.hpp"
#include "touchpoint/monotone.hpp"

using namespace touchpoint;
using namespace touchpoint::monotone;
using convex::ConvexSet;
using convex::ProxFunction;
using hilbert::Matrix;
using touchpoint::testing::gaussian;
using touchpoint::testing::gaussian_matrix;
using touchpoint::testing::random_set;
using touchpoint::testing::uniform;

namespace {

Vector v1(double a) { return (Vector(1) << a).finished(); }
Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

Subspace line_through(double a, double b) {
  Matrix basis(2, 1);
  basis << a, b;
  basis /= basis.norm();
  return Subspace(basis);
}

// Minimizes lambda g(y) + |y - v|^2 / 2 over the line y = t u by dense
// sampling followed by golden-section refinement. Independent of any prox.
Vector line_oracle(const ProxFunction& g, const Subspace& y, double lambda, const Vector& v) {
  const Vector u = y.basis().col(0);
  auto objective = [&](double t) {
    const Vector z = t * u;
    const auto gz = convex::evaluate(g, z);
    if (!gz.is_finite()) return std::numeric_limits<double>::infinity();
    return lambda * gz.value() + 0.5 * (z - v).squaredNorm();
  };
  const double reach = 4.0 * (v.norm() + 10.0);
  double best_t = 0.0;
  double best = objective(0.0);
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double t = -reach + 2.0 * reach * i / n;
    const double val = objective(t);
    if (val < best) best = val, best_t = t;
  }
  double lo = best_t - 2.0 * reach / n;
  double hi = best_t + 2.0 * reach / n;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int k = 0; k < 200; ++k) {
    const double a = hi - phi * (hi - lo);
    const double b = lo + phi * (hi - lo);
    if (objective(a) <= objective(b)) hi = b; else lo = a;
  }
  return 0.5 * (lo + hi) * u;
}

// Random maximally monotone oracle of the given kind (0: subdifferential,
// 1: linear, 2: subspace-restricted subdifferential) on R^n.
ResolventOracle random_oracle(std::mt19937_64& rng, Eigen::Index n, int kind) {
  switch (kind % 3) {
    case 0: {
      const int which = std::uniform_int_distribution<int>(0, 2)(rng);
      if (which == 0) return ResolventOracle::subdifferential(ProxFunction::indicator(random_set(rng, n, rng() % 5)));
      if (which == 1) return ResolventOracle::subdifferential(ProxFunction::support(random_set(rng, n, rng() % 5)));
      return ResolventOracle::subdifferential(ProxFunction::scaled_square(uniform(rng, 0.1, 4.0), n));
    }
    case 1: {
      const Matrix b = gaussian_matrix(rng, n, n);
      const Matrix k = gaussian_matrix(rng, n, n);
      return ResolventOracle::linear_monotone(LinearOperator(b * b.transpose() + k - k.transpose()));
    }
    default: {
      const Eigen::Index ambient = n + 1 + static_cast<Eigen::Index>(rng() % 2);
      const Subspace y = hilbert::orthonormal_range(LinearOperator(gaussian_matrix(rng, ambient, n)));
      // Support functions of bounded sets have full domain, so the restriction is always proper.
      const int set_kind = (rng() % 2 == 0) ? 0 : 1;
      return ResolventOracle::subspace_restricted(ProxFunction::support(random_set(rng, ambient, set_kind)), y);
    }
  }
}

}  // namespace

TEST_CASE("resolvent") {
  SUBCASE("linear") {
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 1.0, 3.0;
    const auto m = ResolventOracle::linear_monotone(LinearOperator(a));
    CHECK((resolvent(m, 1.0, v2(2, 4)) - v2(1, 1)).norm() < 1e-14);
  }
  SUBCASE("subdifferential of an indicator is a projection for every lambda") {
    const auto m = ResolventOracle::subdifferential(ProxFunction::indicator(ConvexSet::box(v1(2), v1(3))));
    for (double lambda : {0.01, 1.0, 100.0}) CHECK(resolvent(m, lambda, v1(-4))(0) == 2.0);
  }
  SUBCASE("rotation is monotone, its negative is not") {
    const Matrix rot = (Matrix(2, 2) << 0, -1, 1, 0).finished();
    CHECK_NOTHROW(ResolventOracle::linear_monotone(LinearOperator(rot)));
    CHECK_THROWS_AS(ResolventOracle::linear_monotone(LinearOperator(-Matrix::Identity(2, 2))), PreconditionError);
  }
  SUBCASE("input validation") {
    const auto m = ResolventOracle::subdifferential(ProxFunction::scaled_square(1.0, 2));
    CHECK_THROWS_AS(resolvent(m, 0.0, v2(1, 1)), ParameterError);
    CHECK_THROWS_AS(resolvent(m, 1.0, v1(1)), InputError);
    CHECK_THROWS_AS(ResolventOracle::subspace_restricted(ProxFunction::scaled_square(1.0, 3), line_through(1, 1)),
                    InputError);
  }
}

TEST_CASE("minty_point") {
  const auto interval = ResolventOracle::subdifferential(ProxFunction::indicator(ConvexSet::box(v1(1), v1(2))));
  CHECK(minty_point(interval, 1.0)(0) == doctest::Approx(1.0));
  CHECK(minty_point(ResolventOracle::linear_monotone(LinearOperator::zero(2, 2)), 3.0).norm() == 0.0);
  CHECK(minty_point(ResolventOracle::subdifferential(ProxFunction::scaled_square(1.0, 2)), 0.5).norm() == 0.0);
  CHECK_THROWS_AS(minty_point(interval, 0.0), ParameterError);
}

TEST_CASE("is_mu_unmonotone") {
  const LinearOperator neg_id(-Matrix::Identity(2, 2));
  const auto at_half = is_mu_unmonotone(neg_id, 0.5);
  CHECK(at_half.holds);
  CHECK(std::abs(at_half.certificate.max_eig) < 1e-15);
  CHECK(at_half.certificate.operator_norm_q == doctest::Approx(1.0));

  const auto above = is_mu_unmonotone(neg_id, 0.6);
  CHECK_FALSE(above.holds);
  CHECK(above.certificate.max_eig == doctest::Approx(0.2));

  CHECK_FALSE(is_mu_unmonotone(LinearOperator::identity(2), 0.1).holds);
  CHECK_THROWS_AS(is_mu_unmonotone(LinearOperator(Matrix::Ones(2, 3)), 0.1), InputError);
  CHECK_THROWS_AS(is_mu_unmonotone(neg_id, 0.0), ParameterError);
}

TEST_CASE("modulus_from_lambda") {
  CHECK(modulus_from_lambda(LinearOperator(-Matrix::Identity(3, 3)), 1.0) == 0.5);
  CHECK(modulus_from_lambda(LinearOperator(-2.0 * Matrix::Identity(2, 2)), 2.0) == doctest::Approx(0.4));
  CHECK_THROWS_AS(modulus_from_lambda(LinearOperator::identity(2), 0.5), PreconditionError);
  CHECK_THROWS_AS(modulus_from_lambda(LinearOperator(-Matrix::Identity(2, 2)), 1.5), PreconditionError);
}

TEST_CASE("sum_prox") {
  const Subspace diagonal = line_through(1, 1);

  SUBCASE("box constraint on the diagonal") {
    const auto g = ProxFunction::indicator(ConvexSet::box(v2(0, -std::numeric_limits<double>::infinity()),
                                                          v2(2, std::numeric_limits<double>::infinity())));
    const Vector z = sum_prox(g, diagonal, 1.0, v2(3, 3));
    CHECK((z - v2(2, 2)).norm() < 1e-9);
    CHECK((z - line_oracle(g, diagonal, 1.0, v2(3, 3))).norm() < 1e-6);
  }
  SUBCASE("zero function reduces to the projection") {
    const Vector z = sum_prox(ProxFunction::zero(2), diagonal, 2.0, v2(3, 1));
    CHECK((z - v2(2, 2)).norm() < 1e-12);
  }
  SUBCASE("nonempty intersection with the anti-diagonal") {
    const double inf = std::numeric_limits<double>::infinity();
    const auto g = ProxFunction::indicator(ConvexSet::box(v2(2, -inf), v2(3, inf)));
    const Vector z = sum_prox(g, line_through(1, -1), 1.0, v2(0, 0));
    CHECK((z - v2(2, -2)).norm() < 1e-8);
  }
  SUBCASE("empty intersection does not converge") {
    const auto g = ProxFunction::indicator(ConvexSet::box(v2(2, 2), v2(3, 3)));
    try {
      sum_prox(g, line_through(1, -1), 1.0, v2(0, 0), 1e-11, 500);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.iterations() == 500);
      CHECK(e.residual() > 1.0);
    }
  }
  SUBCASE("returned subgradient certifies optimality") {
    const auto g = ProxFunction::support(ConvexSet::ball(v2(1, 0), 0.5));
    const auto r = sum_prox_detailed(g, diagonal, 0.7, v2(-2, 5));
    // v - z - lambda * s must be orthogonal to Y.
    const Vector normal = v2(-2, 5) - r.z - 0.7 * r.subgradient;
    CHECK(std::abs(diagonal.basis().col(0).dot(normal)) < 1e-9);
    CHECK((r.z - line_oracle(g, diagonal, 0.7, v2(-2, 5))).norm() < 1e-6);
  }
}

TEST_CASE("properties") {
  std::mt19937_64 rng(11);

  SUBCASE("sum_prox matches a line-search oracle") {
    for (int k = 0; k < 40; ++k) {
      const Subspace y = line_through(uniform(rng, -1, 1), uniform(rng, -1, 1));
      const auto g = (k % 2 == 0) ? ProxFunction::support(random_set(rng, 2, k / 2))
                                  : ProxFunction::indicator(touchpoint::testing::random_ball(rng, 2, 0.3));
      const Vector v = gaussian(rng, 2, 3.0);
      const double lambda = uniform(rng, 0.2, 3.0);
      // Balls near the origin may still miss the line; only compare when the oracle finds a feasible point.
      const Vector oracle = line_oracle(g, y, lambda, v);
      if (!convex::evaluate(g, oracle).is_finite()) continue;
      try {
        CHECK((sum_prox(g, y, lambda, v) - oracle).norm() < 1e-5 * std::max(1.0, v.norm()));
      } catch (const ConvergenceError&) {
        FAIL("sum_prox did not converge on a feasible instance");
      }
    }
  }

  SUBCASE("resolvents are firmly nonexpansive") {
    for (int kind = 0; kind < 3; ++kind) {
      const auto m = random_oracle(rng, 3, kind);
      double worst = -1.0;
      for (int k = 0; k < 1000; ++k) {
        const double lambda = uniform(rng, 0.1, 3.0);
        const Vector x = gaussian(rng, m.ambient_dim(), 3.0);
        const Vector y = gaussian(rng, m.ambient_dim(), 3.0);
        const Vector jx = resolvent(m, lambda, x);
        const Vector jy = resolvent(m, lambda, y);
        worst = std::max(worst, (jx - jy).squaredNorm() - (x - y).dot(jx - jy));
      }
      INFO("oracle kind " << m.kind_name());
      CHECK(worst <= 1e-10);
    }
  }

  SUBCASE("minty point solves 0 in mu y + M y") {
    for (int k = 0; k < 30; ++k) {
      const auto m = random_oracle(rng, 1 + k % 4, k);
      for (double mu : {0.1, 1.0, 10.0}) {
        const Vector y = minty_point(m, mu);
        CHECK(inclusion_residual(m, y, -mu * y) <= 1e-8);
      }
    }
  }

  SUBCASE("modulus certificate and sampled unmonotonicity") {
    for (int k = 0; k < 100; ++k) {
      const Eigen::Index n = 1 + k % 6;
      const double lambda = uniform(rng, 0.1, 2.0);
      Matrix q = gaussian_matrix(rng, n, n);
      const double top = hilbert::max_sym_eigenvalue(q);
      q -= (top + lambda) * Matrix::Identity(n, n);
      const LinearOperator qop(q);
      const double mu = modulus_from_lambda(qop, lambda);
      const auto check = is_mu_unmonotone(qop, mu);
      CHECK(check.holds);
      for (int j = 0; j < 20; ++j) {
        const Vector dy = gaussian(rng, n);
        const Vector dq = q * dy;
        CHECK(dy.dot(dq) + mu * (dy.squaredNorm() + dq.squaredNorm()) <= 1e-10 * dy.squaredNorm());
      }
      // Largest admissible modulus by bisection on an independent eigenvalue computation.
      const Matrix sym = 0.5 * (q + q.transpose());
      const Matrix gram = Matrix::Identity(n, n) + q.transpose() * q;
      auto top_eig = [&](double m) {
        return Eigen::SelfAdjointEigenSolver<Matrix>(sym + m * gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
      };
      double lo = mu;
      double hi = 1.0;
      while (top_eig(hi) <= 0.0) hi *= 2.0;
      for (int it = 0; it < 100; ++it) (top_eig(0.5 * (lo + hi)) <= 0.0 ? lo : hi) = 0.5 * (lo + hi);
      CHECK(is_mu_unmonotone(qop, lo).holds);
      CHECK_FALSE(is_mu_unmonotone(qop, lo + 1e-6).holds);
    }
  }
}
