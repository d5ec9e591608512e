#include "touchpoint/touching.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <random>
#include <string>
#include <vector>

#include "touchpoint/errors.hpp"

namespace touchpoint::touching {

using hilbert::Matrix;

namespace {

constexpr double kAgreementTol = 1e-6;

// Displacements below this (relative) size are dominated by rounding and are
// not used to estimate the contraction ratio.
constexpr double kRatioFloor = 1e-12;
constexpr std::size_t kRatioWindow = 8;

Vector random_start(std::mt19937_64& rng, Eigen::Index n, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  const double norm = v.norm();
  if (norm == 0.0) return Vector::Zero(n);
  const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
  return (r / norm) * v;
}

}  // namespace

double graph_residual(const ResolventOracle& m, const LinearOperator& q, const Vector& d, const Vector& e,
                      double gamma) {
  return (e - q.apply(d)).norm() + (monotone::resolvent(m, gamma, d + gamma * e) - d).norm();
}

TouchResult touch(const ResolventOracle& m, const LinearOperator& q, double lambda, const TouchOptions& options) {
  if (!q.is_square()) throw InputError("touch: Q must be square");
  if (q.domain_dim() != m.ambient_dim()) {
    throw InputError("touch: M acts on dimension " + std::to_string(m.ambient_dim()) + " but Q on " +
                     std::to_string(q.domain_dim()));
  }
  if (!(options.tol > 0.0)) throw ParameterError("touch: tol must be positive");
  if (options.max_iter <= 0) throw ParameterError("touch: max_iter must be positive");

  const double mu = monotone::modulus_from_lambda(q, lambda);
  const double beta = hilbert::operator_norm(q);
  const double gamma_max = 2.0 * mu / (beta * beta);
  const double gamma = options.gamma.value_or(mu / (beta * beta));
  if (!(gamma > 0.0) || !(gamma < gamma_max)) {
    throw ParameterError("touch: gamma = " + std::to_string(gamma) + " outside (0, " + std::to_string(gamma_max) +
                         ")");
  }
  const double bound = std::sqrt(std::max(0.0, 1.0 - 2.0 * gamma * mu + gamma * gamma * beta * beta));

  const Eigen::Index n = q.domain_dim();
  Vector y = Vector::Zero(n);
  if (options.initial) {
    hilbert::require_dim(*options.initial, n, "touch: initial point");
    hilbert::require_finite(*options.initial, "touch: initial point");
    y = *options.initial;
  }

  TouchResult out;
  out.gamma = gamma;
  out.mu = mu;
  out.lambda = lambda;
  out.beta = beta;
  out.contraction_bound = bound;

  double previous_step = -1.0;
  double step = 0.0;
  // Recent successive-displacement ratios; the largest one estimates the
  // local contraction factor r, and |y - y*| <= step * r / (1 - r).
  std::array<double, kRatioWindow> recent{};
  for (int k = 1; k <= options.max_iter; ++k) {
    Vector next = monotone::resolvent(m, gamma, y + gamma * q.apply(y));
    step = (next - y).norm();
    const double scale = std::max(1.0, y.norm());
    double ratio = 0.0;
    if (previous_step > kRatioFloor * scale) {
      ratio = step / previous_step;
      out.max_contraction_ratio = std::max(out.max_contraction_ratio, ratio);
    }
    recent[static_cast<std::size_t>(k) % kRatioWindow] = ratio;
    previous_step = step;
    y = std::move(next);
    const double local = std::min(*std::max_element(recent.begin(), recent.end()), bound);
    const double error_estimate = local < 1.0 ? step * local / (1.0 - local) : step;
    const double target = options.tol * std::max(1.0, y.norm());
    if (step <= target && error_estimate <= target) {
      out.iterations = k;
      out.d = y;
      out.e = q.apply(y);
      out.graph_residual = graph_residual(m, q, out.d, out.e, gamma);
      return out;
    }
  }
  throw ConvergenceError("touch: no convergence after " + std::to_string(options.max_iter) +
                             " iterations (last displacement " + std::to_string(step) + ", contraction bound " +
                             std::to_string(bound) + ")",
                         step, options.max_iter);
}

TouchResult fixed_point(const ResolventOracle& m, const LinearOperator& t, double lambda,
                        const TouchOptions& options) {
  if (!t.is_square()) throw InputError("fixed_point: T must be square");
  if (!(lambda > 0.0)) throw ParameterError("fixed_point: lambda must be positive");
  const LinearOperator q = hilbert::invert(t);

  // <x,Tx> + lambda|Tx|^2 <= 0 for all x  <=>  sym(T) + lambda T^T T is negative semidefinite.
  const Matrix& a = t.matrix();
  const double top = hilbert::max_sym_eigenvalue(Matrix(t.symmetric_part() + lambda * a.transpose() * a));
  if (top > monotone::kSpectralSlack) {
    throw PreconditionError("fixed_point: <x,Tx> + lambda|Tx|^2 <= 0 fails; lambda_max = " + std::to_string(top));
  }
  TouchResult r = touch(m, q, lambda, options);
  // d = T(Q d) = T e; keep the value consistent with the returned e.
  r.d = t.apply(r.e);
  return r;
}

VerificationReport verify_touch(const ResolventOracle& m, const LinearOperator& q, const TouchResult& result,
                                int restarts, std::uint64_t seed, const TouchOptions& options) {
  const Eigen::Index n = q.domain_dim();
  if (!q.is_square() || m.ambient_dim() != n) throw InputError("verify_touch: M and Q dimensions differ");
  hilbert::require_dim(result.d, n, "verify_touch: result.d");
  hilbert::require_dim(result.e, n, "verify_touch: result.e");
  if (restarts < 0) throw ParameterError("verify_touch: restarts must be nonnegative");

  const double radius = std::max(1.0, hilbert::operator_norm(q));
  const double scale = std::max(1.0, result.d.norm());
  const double gamma = result.gamma > 0.0 ? result.gamma : 1.0;

  VerificationReport report;
  report.add("graph_residual", graph_residual(m, q, result.d, result.e, gamma), kAgreementTol * scale);

  // Each restart owns its RNG and state; results are merged by index.
  std::vector<std::future<std::optional<TouchResult>>> jobs;
  for (int i = 0; i < restarts; ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i]() -> std::optional<TouchResult> {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL);
      TouchOptions opts = options;
      opts.gamma = result.gamma > 0.0 ? std::optional<double>(result.gamma) : options.gamma;
      opts.initial = random_start(rng, n, radius);
      try {
        return touch(m, q, result.lambda, opts);
      } catch (const ConvergenceError&) {
        return std::nullopt;
      }
    }));
  }
  std::vector<TouchResult> runs;
  int failed = 0;
  for (auto& job : jobs) {
    auto r = job.get();
    if (r) {
      runs.push_back(std::move(*r));
    } else {
      ++failed;
    }
  }

  double pairwise = 0.0;
  double from_result = 0.0;
  double worst_residual = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    from_result = std::max(from_result, (runs[i].d - result.d).norm());
    worst_residual = std::max(worst_residual, runs[i].graph_residual);
    for (std::size_t j = i + 1; j < runs.size(); ++j) pairwise = std::max(pairwise, (runs[i].d - runs[j].d).norm());
  }
  report.add("restart_deviation", pairwise, kAgreementTol * scale);
  report.add("result_deviation", from_result, kAgreementTol * scale);
  report.add("restart_graph_residual", worst_residual, kAgreementTol * scale);
  report.add("failed_restarts", static_cast<double>(failed), 0.0);
  report.note("restarts: " + std::to_string(restarts));
  return report;
}

}  // namespace touchpoint::touching
