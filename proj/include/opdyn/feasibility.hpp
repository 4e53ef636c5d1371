#pragma once

// Ball-return feasibility:
//
//   value = min ||T z - c||_2   subject to   ||z - c||_2 <= r.
//
// T(B) meets B for the open ball B = B(c, r) exactly when value < r. With
// z = c + w and g = T c - c this is the least-squares trust-region problem
// min ||T w + g|| over ||w|| <= r. In the singular basis T = U S V* with
// b = U* g the shifted normal equations (T*T + mu I) w = -T* g decouple:
//
//   y_i(mu) = -s_i b_i / (s_i^2 + mu),   w = V y.
//
// ||y(mu)|| decreases monotonically in mu, so either the minimum-norm
// unconstrained solution (mu = 0) is feasible, or the multiplier is the unique
// root of ||y(mu)|| = r. T*T is positive semidefinite, so there is no hard
// case: components with s_i = 0 contribute nothing to ||y(mu)|| for mu > 0.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "opdyn/operators.hpp"

namespace opdyn {

struct FeasibilityOptions {
  std::size_t max_iterations = 200;
  std::size_t dense_cap = 512;
};

struct FeasibilityResult {
  double value;     // ||T z - c||, recomputed from z
  Vector z;         // minimizer, inside the closed ball
  double multiplier;  // mu >= 0; 0 when the unconstrained minimizer is feasible
  bool interior;
  std::size_t iterations;
};

namespace detail {

struct SecularSolution {
  CVector y;
  double mu;
  bool interior;
  std::size_t iterations;
};

/// Solves min ||diag(s) y + b|| over ||y|| <= r for s_i >= 0.
inline SecularSolution solve_secular(const Eigen::VectorXd& s, const CVector& b, double r, const FeasibilityOptions& opt) {
  const Eigen::Index n = s.size();
  const double smax = n > 0 ? s.maxCoeff() : 0.0;
  const double rank_tol = smax * static_cast<double>(std::max<Eigen::Index>(n, 1)) * std::numeric_limits<double>::epsilon();

  CVector y0 = CVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (s[i] > rank_tol) y0[i] = -b[i] / s[i];
  if (y0.norm() <= r) return {y0, 0.0, true, 0};

  auto y_of = [&](double mu) {
    CVector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = (s[i] > rank_tol) ? Complex(-s[i] / (s[i] * s[i] + mu)) * b[i] : Complex(0.0);
    return y;
  };

  // ||y(mu)|| <= smax ||b|| / mu, so this mu already lands inside the ball.
  double lo = 0.0;
  double hi = std::max(smax * b.norm() / r, std::numeric_limits<double>::min());
  std::size_t it = 0;
  while (y_of(hi).norm() > r) {
    lo = hi;
    hi *= 2.0;
    if (++it > opt.max_iterations)
      fail(ErrorKind::SolverFailure, "could not bracket the trust-region multiplier");
  }

  // Newton on phi(mu) = 1/r - 1/||y(mu)||, which is nearly linear in mu,
  // safeguarded by bisection on [lo, hi].
  double mu = hi;
  for (; it < opt.max_iterations; ++it) {
    const CVector y = y_of(mu);
    const double ny = y.norm();
    if (std::abs(ny - r) <= 1e-14 * r || (hi - lo) <= 1e-15 * hi) break;
    if (ny > r) lo = mu; else hi = mu;
    // d||y||^2/dmu = -2 sum s_i^2 |b_i|^2 / (s_i^2 + mu)^3
    double dsq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (s[i] <= rank_tol) continue;
      const double den = s[i] * s[i] + mu;
      dsq -= 2.0 * s[i] * s[i] * std::norm(b[i]) / (den * den * den);
    }
    const double dphi = 0.5 * dsq / (ny * ny * ny);
    double next = (dphi < 0.0) ? mu - (1.0 / r - 1.0 / ny) / dphi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }
  if (it >= opt.max_iterations) fail(ErrorKind::SolverFailure, "trust-region multiplier root-find did not converge");

  CVector y = y_of(mu);
  const double ny = y.norm();
  if (ny > r) y *= r / ny;
  return {y, mu, false, it};
}

}  // namespace detail

inline FeasibilityResult ball_return_feasibility(const Operator& t, const Ball& b, const FeasibilityOptions& opt = {}) {
  require(t.dim() == b.dim(), ErrorKind::DimensionMismatch, "operator and ball dimensions differ");
  const CVector& c = b.center.coords();
  const Eigen::Index n = c.size();

  auto finish = [&](CVector w, double mu, bool interior, std::size_t iters) {
    const double wn = w.norm();
    if (wn > b.radius) w *= (wn > 0.0 ? b.radius / wn : 0.0);
    Vector z(CVector(c + w));
    const double value = (detail::apply_raw(t, z.coords()) - c).norm();
    return FeasibilityResult{value, std::move(z), mu, interior, iters};
  };

  if (b.radius == 0.0) return finish(CVector::Zero(n), 0.0, true, 0);

  // a z - c = a w + (a - 1) c: point w against (a - 1) c and stop at the ball.
  if (const auto* s = t.as<ops::Scalar>()) {
    const Complex a = s->a;
    const double gap = std::abs(a - 1.0) * c.norm();
    if (gap == 0.0 || a == Complex(0.0)) return finish(CVector::Zero(n), 0.0, true, 0);
    const double beta = std::min(1.0, b.radius * std::abs(a) / gap);
    CVector w = (-beta * (a - 1.0) / a) * c;
    const double mu = beta >= 1.0 ? 0.0 : std::max(0.0, std::abs(a) * gap / b.radius - std::norm(a));
    return finish(std::move(w), mu, beta >= 1.0, 0);
  }

  const CVector g = detail::apply_raw(t, c) - c;

  if (const auto* d = t.as<ops::Diagonal>()) {
    // T = U S with U = diag(phase(d_i)), V = I.
    Eigen::VectorXd s = d->entries.cwiseAbs();
    CVector phase(n);
    for (Eigen::Index i = 0; i < n; ++i) phase[i] = s[i] > 0.0 ? d->entries[i] / s[i] : Complex(1.0);
    const CVector bb = phase.conjugate().cwiseProduct(g);
    auto sol = detail::solve_secular(s, bb, b.radius, opt);
    return finish(std::move(sol.y), sol.mu, sol.interior, sol.iterations);
  }

  if (t.dim() > opt.dense_cap)
    fail(ErrorKind::DimensionCapExceeded, "feasibility solver dense cap is " + std::to_string(opt.dense_cap));
  const CMatrix m = materialize(t);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const CVector bb = svd.matrixU().adjoint() * g;
  auto sol = detail::solve_secular(s, bb, b.radius, opt);
  CVector w = svd.matrixV() * sol.y;
  return finish(std::move(w), sol.mu, sol.interior, sol.iterations);
}

}  // namespace opdyn
