#pragma once

// Entire C-regularized groups of the exponential form S(z) = exp(zA) C.
// When AC = CA this family satisfies S(0) = C and S(z+w) C = S(z) S(w).

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "opdyn/operators.hpp"

namespace opdyn {

struct GroupTolerances {
  double commutation = 1e-10;
  /// exp(|z| * ||A||) may not exceed this.
  double overflow_guard = 1e100;
};

class CRegGroup {
 public:
  const Operator& generator() const noexcept { return a_; }
  const Operator& regularizer() const noexcept { return c_; }
  std::size_t dim() const noexcept { return a_.dim(); }

  /// ||AC - CA|| measured at construction.
  double commutation_defect() const noexcept { return commutation_defect_; }
  double generator_norm() const noexcept { return generator_norm_; }
  /// C == 0, so S(z) == 0 for every z.
  bool degenerate() const noexcept { return degenerate_; }

  /// The exponential scalar group S(z) = e^z I (A = I, C = I, up to scaling of C).
  bool is_scalar_exponential() const {
    const auto* a = a_.as<ops::Scalar>();
    return a && a->a == Complex(1.0, 0.0) && c_.as<ops::Scalar>() != nullptr;
  }

  friend CRegGroup build_group(Operator a, Operator c, const GroupTolerances& tol);
  friend CRegGroup build_group_unchecked(Operator a, Operator c);

 private:
  CRegGroup(Operator a, Operator c, double defect, double anorm, bool degenerate)
      : a_(std::move(a)), c_(std::move(c)), commutation_defect_(defect), generator_norm_(anorm),
        degenerate_(degenerate) {}

  Operator a_;
  Operator c_;
  double commutation_defect_;
  double generator_norm_;
  bool degenerate_;
};

namespace detail {
inline double commutator_norm(const Operator& a, const Operator& c) {
  const CMatrix am = materialize(a);
  const CMatrix cm = materialize(c);
  const CMatrix comm = am * cm - cm * am;
  if (comm.isZero(0.0)) return 0.0;
  return matrix_two_norm_upper(comm);
}

inline bool is_zero_operator(const Operator& c) {
  if (const auto* s = c.as<ops::Scalar>()) return s->a == Complex(0.0, 0.0);
  return materialize(c).isZero(0.0);
}
}  // namespace detail

/// Builds exp(zA)C after checking that A and C commute.
inline CRegGroup build_group(Operator a, Operator c, const GroupTolerances& tol = {}) {
  require(a.dim() == c.dim(), ErrorKind::DimensionMismatch, "generator and regularizer dimensions differ");
  const double defect = detail::commutator_norm(a, c);
  if (defect > tol.commutation)
    fail(ErrorKind::NotCommuting, "||AC - CA|| = " + std::to_string(defect) + " exceeds " + std::to_string(tol.commutation));
  const double anorm = operator_norm_upper(a);
  const bool degenerate = detail::is_zero_operator(c);
  return CRegGroup(std::move(a), std::move(c), defect, anorm, degenerate);
}

/// Same construction without the commutation check; for negative controls.
inline CRegGroup build_group_unchecked(Operator a, Operator c) {
  require(a.dim() == c.dim(), ErrorKind::DimensionMismatch, "generator and regularizer dimensions differ");
  const double defect = detail::commutator_norm(a, c);
  const double anorm = operator_norm_upper(a);
  const bool degenerate = detail::is_zero_operator(c);
  return CRegGroup(std::move(a), std::move(c), defect, anorm, degenerate);
}

/// exp(zA), exact componentwise for scalar and diagonal generators,
/// scaling-and-squaring Pade otherwise.
inline Operator group_exponential(const CRegGroup& g, Complex z, const GroupTolerances& tol = {}) {
  const double growth = std::abs(z) * g.generator_norm();
  if (growth > std::log(tol.overflow_guard))
    fail(ErrorKind::Overflow, "|z| * ||A|| = " + std::to_string(growth) + " exceeds the overflow guard");
  const Operator& a = g.generator();
  const std::size_t n = g.dim();
  if (const auto* s = a.as<ops::Scalar>()) return scalar(n, std::exp(z * s->a));
  if (const auto* d = a.as<ops::Diagonal>()) {
    CVector e(d->entries.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = std::exp(z * d->entries[i]);
    return diagonal(std::move(e));
  }
  const CMatrix za = z * materialize(a);
  return dense(za.exp());
}

/// S(z) = exp(zA) C. S(0) is C itself.
inline Operator evaluate(const CRegGroup& g, Complex z, const GroupTolerances& tol = {}) {
  if (z == Complex(0.0, 0.0)) return g.regularizer();
  return compose(group_exponential(g, z, tol), g.regularizer());
}

}  // namespace opdyn
