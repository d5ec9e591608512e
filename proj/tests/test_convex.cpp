#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "generators.hpp"
#include "touchpoint/convex.hpp"
#include "touchpoint/errors.hpp"

using namespace touchpoint;
using namespace touchpoint::convex;
using touchpoint::testing::gaussian;
using touchpoint::testing::random_set;
using touchpoint::testing::sample_in;
using touchpoint::testing::uniform;

namespace {

Vector v1(double a) { return (Vector(1) << a).finished(); }
Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

const double kInf = std::numeric_limits<double>::infinity();

// Every function kind over R^n with a closed-form conjugate, plus one block sum.
std::vector<ProxFunction> conjugable_functions(std::mt19937_64& rng, Eigen::Index n) {
  std::vector<ProxFunction> out;
  for (int kind = 0; kind < 5; ++kind) {
    out.push_back(ProxFunction::indicator(random_set(rng, n, kind)));
    out.push_back(ProxFunction::support(random_set(rng, n, kind)));
  }
  out.push_back(ProxFunction::scaled_square(uniform(rng, 0.1, 5.0), n));
  out.push_back(ProxFunction::separable_sum(
      {ProxFunction::indicator(random_set(rng, n, 0)), ProxFunction::support(random_set(rng, n, 1)),
       ProxFunction::scaled_square(2.0, n)}));
  return out;
}

}  // namespace

TEST_CASE("project") {
  const ConvexSet unit_ball = ConvexSet::ball(v2(0, 0), 1.0);
  CHECK((project(unit_ball, v2(3, 0)) - v2(1, 0)).norm() < 1e-15);
  CHECK((project(unit_ball, v2(0.3, -0.4)) - v2(0.3, -0.4)).norm() == 0.0);

  const ConvexSet square = ConvexSet::box(v2(0, 0), v2(1, 1));
  CHECK((project(square, v2(2, -1)) - v2(1, 0)).norm() == 0.0);

  const ConvexSet lower_half = ConvexSet::halfspace(v2(0, 1), 1.0);
  CHECK((project(lower_half, v2(5, 4)) - v2(5, 1)).norm() < 1e-15);

  hilbert::Matrix dir(2, 1);
  dir << 1.0, 1.0;
  const ConvexSet diagonal = ConvexSet::affine_span(v2(0, 1), dir);
  // Line y = x + 1; nearest point of (2, 0) is (0.5, 1.5).
  CHECK((project(diagonal, v2(2, 0)) - v2(0.5, 1.5)).norm() < 1e-14);

  CHECK((project(ConvexSet::singleton(v2(7, 7)), v2(0, 0)) - v2(7, 7)).norm() == 0.0);
  CHECK_THROWS_AS(project(unit_ball, v1(1.0)), InputError);
}

TEST_CASE("set construction is validated") {
  CHECK_THROWS_AS(ConvexSet::ball(v2(0, 0), -1.0), InputError);
  CHECK_THROWS_AS(ConvexSet::box(v2(1, 0), v2(0, 1)), InputError);
  CHECK_THROWS_AS(ConvexSet::box(v2(kInf, 0), v2(kInf, 1)), InputError);
  CHECK_THROWS_AS(ConvexSet::halfspace(v2(0, 0), 1.0), InputError);
  CHECK_THROWS_AS(ConvexSet::singleton(v2(0, std::nan(""))), InputError);
  CHECK(ConvexSet::ball(v2(0, 0), 0.0).kind_name() == "ball");
}

TEST_CASE("support_value") {
  // <c,u> + r|u| = -15 + 3
  CHECK(support_value(ConvexSet::ball(v2(5, 0), 1.0), v2(-3, 0)).value() == doctest::Approx(-12.0).epsilon(1e-15));
  CHECK(support_value(ConvexSet::singleton(v2(2, -1)), v2(3, 4)).value() == doctest::Approx(2.0));
  CHECK(support_value(ConvexSet::box(v2(-1, -1), v2(1, 1)), v2(3, -2)).value() == doctest::Approx(5.0));

  SUBCASE("unbounded kinds are infinite off their barrier cone") {
    const ConvexSet h = ConvexSet::halfspace(v2(1, 0), 2.0);
    CHECK(support_value(h, v2(3, 0)).value() == doctest::Approx(6.0));
    CHECK_FALSE(support_value(h, v2(-3, 0)).is_finite());
    CHECK_FALSE(support_value(h, v2(1, 1)).is_finite());
    CHECK(support_value(h, v2(0, 0)).value() == 0.0);

    const ConvexSet half_line = ConvexSet::box(v1(0.0), v1(kInf));
    CHECK(support_value(half_line, v1(-2.0)).value() == 0.0);
    CHECK_FALSE(support_value(half_line, v1(2.0)).is_finite());

    hilbert::Matrix dir(2, 1);
    dir << 1.0, 0.0;
    const ConvexSet line = ConvexSet::affine_span(v2(0, 3), dir);
    CHECK(support_value(line, v2(0, 2)).value() == doctest::Approx(6.0));
    CHECK_FALSE(support_value(line, v2(1, 2)).is_finite());
  }
}

TEST_CASE("prox") {
  const ConvexSet unit_ball = ConvexSet::ball(v2(0, 0), 1.0);
  for (double lambda : {0.1, 1.0, 7.0}) {
    CHECK((prox(ProxFunction::indicator(unit_ball), lambda, v2(3, 0)) - v2(1, 0)).norm() < 1e-15);
  }
  // Support of [-1,1] is |x|; its prox is soft thresholding: 3 -> 2.
  CHECK(prox(ProxFunction::support(ConvexSet::box(v1(-1), v1(1))), 1.0, v1(3.0))(0) == doctest::Approx(2.0));
  CHECK(prox(ProxFunction::support(ConvexSet::box(v1(-1), v1(1))), 1.0, v1(0.5))(0) == 0.0);
  CHECK((prox(ProxFunction::scaled_square(1.0, 2), 1.0, v2(3, -4)) - v2(1.5, -2)).norm() < 1e-15);

  // |x - 2|: prox at 5 with lambda 1 is 4.
  const auto shifted = ProxFunction::translated(ProxFunction::support(ConvexSet::box(v1(-1), v1(1))), v1(2.0));
  CHECK(prox(shifted, 1.0, v1(5.0))(0) == doctest::Approx(4.0));

  CHECK_THROWS_AS(prox(ProxFunction::scaled_square(1.0, 2), 0.0, v2(1, 1)), ParameterError);
  CHECK_THROWS_AS(prox(ProxFunction::scaled_square(1.0, 2), -1.0, v2(1, 1)), ParameterError);
}

TEST_CASE("evaluate") {
  const auto ind = ProxFunction::indicator(ConvexSet::ball(v2(0, 0), 1.0));
  CHECK(evaluate(ind, v2(0.5, 0)) == ExtendedReal(0.0));
  CHECK(evaluate(ind, v2(1.0 + 1e-12, 0)) == ExtendedReal(0.0));
  CHECK_FALSE(evaluate(ind, v2(2, 0)).is_finite());
  CHECK(evaluate(ProxFunction::scaled_square(1.0, 2), v2(3, 4)).value() == doctest::Approx(12.5));

  const auto sum = ProxFunction::separable_sum({ind, ProxFunction::scaled_square(2.0, 1)});
  CHECK(sum.ambient_dim() == 3);
  CHECK(evaluate(sum, (Vector(3) << 0, 0, 3).finished()).value() == doctest::Approx(9.0));
  CHECK_FALSE(evaluate(sum, (Vector(3) << 5, 0, 3).finished()).is_finite());
}

TEST_CASE("conjugate_value") {
  const ConvexSet b = ConvexSet::ball(v2(5, 0), 1.0);
  CHECK(conjugate_value(ProxFunction::indicator(b), v2(-3, 0)).value() == doctest::Approx(-12.0));
  CHECK(conjugate_value(ProxFunction::scaled_square(1.0, 2), v2(3, 4)).value() == doctest::Approx(12.5));
  const ConvexSet box = ConvexSet::box(v2(-1, -1), v2(1, 1));
  CHECK(conjugate_value(ProxFunction::support(box), v2(0.5, -1)) == ExtendedReal(0.0));
  CHECK_FALSE(conjugate_value(ProxFunction::support(box), v2(2, 0)).is_finite());

  // (g(. - a))*(u) = g*(u) + <a, u>
  const auto shifted = ProxFunction::translated(ProxFunction::support(ConvexSet::box(v1(-1), v1(1))), v1(2.0));
  CHECK(conjugate_value(shifted, v1(0.5)).value() == doctest::Approx(1.0));
  CHECK_FALSE(conjugate(shifted).has_value());
}

TEST_CASE("ExtendedReal") {
  const ExtendedReal inf = ExtendedReal::infinity();
  CHECK_FALSE((inf + 3.0).is_finite());
  CHECK((ExtendedReal(2.0) + 3.0).value() == 5.0);
  CHECK(std::isinf(inf.as_double()));
  CHECK_THROWS_AS(inf.value(), std::logic_error);
}

TEST_CASE("properties") {
  std::mt19937_64 rng(7);

  SUBCASE("Moreau identity") {
    for (Eigen::Index n : {1, 2, 3}) {
      for (const auto& f : conjugable_functions(rng, n)) {
        const auto fc = conjugate(f);
        REQUIRE(fc.has_value());
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
          const double lambda = std::exp(uniform(rng, std::log(0.05), std::log(20.0)));
          const Vector x = gaussian(rng, f.ambient_dim(), 3.0);
          const Vector sum = prox(f, lambda, x) + lambda * prox(*fc, 1.0 / lambda, x / lambda);
          worst = std::max(worst, (sum - x).norm());
        }
        CHECK(worst <= 1e-10);
      }
    }
  }

  SUBCASE("Fenchel-Young") {
    for (const auto& f : conjugable_functions(rng, 3)) {
      const auto fc = *conjugate(f);
      for (int k = 0; k < 300; ++k) {
        // Points of the domains: proxes land in dom f and dom f*.
        const Vector x = prox(f, 1.0, gaussian(rng, f.ambient_dim(), 3.0));
        const Vector u = prox(fc, 1.0, gaussian(rng, f.ambient_dim(), 3.0));
        const ExtendedReal lhs = evaluate(f, x) + conjugate_value(f, u);
        if (lhs.is_finite()) CHECK(lhs.value() >= x.dot(u) - 1e-9);
      }
    }
  }

  SUBCASE("projection obtuse-angle characterization") {
    for (int kind = 0; kind < 5; ++kind) {
      for (int inst = 0; inst < 20; ++inst) {
        const ConvexSet c = random_set(rng, 3, kind);
        const Vector x = gaussian(rng, 3, 4.0);
        const Vector p = project(c, x);
        CHECK(contains(c, p, 1e-10));
        double worst = -1.0;
        for (int k = 0; k < 100; ++k) worst = std::max(worst, (x - p).dot(sample_in(rng, c) - p));
        CHECK(worst <= 1e-10 * std::max(1.0, x.squaredNorm()));
      }
    }
  }

  SUBCASE("prox is firmly nonexpansive and satisfies its optimality condition") {
    for (const auto& f : conjugable_functions(rng, 2)) {
      for (int k = 0; k < 200; ++k) {
        const double lambda = uniform(rng, 0.1, 5.0);
        const Vector x = gaussian(rng, f.ambient_dim(), 3.0);
        const Vector y = gaussian(rng, f.ambient_dim(), 3.0);
        const Vector px = prox(f, lambda, x);
        const Vector py = prox(f, lambda, y);
        CHECK((px - py).squaredNorm() <= (x - y).dot(px - py) + 1e-10);

        // (x - px)/lambda is a subgradient at px: f(z) >= f(px) + <g, z - px> on dom f.
        const Vector g = (x - px) / lambda;
        const Vector z = prox(f, 1.0, gaussian(rng, f.ambient_dim(), 3.0));
        const ExtendedReal fz = evaluate(f, z);
        const ExtendedReal fp = evaluate(f, px);
        REQUIRE(fp.is_finite());
        if (fz.is_finite()) CHECK(fz.value() >= fp.value() + g.dot(z - px) - 1e-9 * std::max(1.0, z.norm()));
      }
    }
  }
}
