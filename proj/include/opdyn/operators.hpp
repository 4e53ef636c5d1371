#pragma once

// Bounded operators on C^dim with exact structured forms and a dense fallback.
//
// Sequence-space operators (shifts) are truncated to C^dim: coordinates
// pushed past index dim are dropped. Analyses that rely on shift exactness
// declare a TruncationWindow and validate it before running.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "opdyn/core_space.hpp"
#include "opdyn/linalg.hpp"

namespace opdyn {

namespace detail {
struct OperatorNode;
}

class Operator;

namespace ops {
struct Dense {
  CMatrix matrix;
};
struct Diagonal {
  CVector entries;
};
/// (Bx)_i = weight * x_{i+1}; the last coordinate receives 0.
struct BackwardShift {
  Complex weight;
};
/// (Fx)_{i+1} = weight * x_i; (Fx)_1 = 0 and x_dim is dropped.
struct ForwardShift {
  Complex weight;
};
struct Scalar {
  Complex a;
};
/// left ∘ right: right acts first.
struct Composition;
struct DirectSum;
/// e_1 -> e_1, e_k -> 0 for k >= 2.
struct RankOneFix {};
/// base^exponent, kept lazy for dense bases.
struct Power;
}  // namespace ops

/// Immutable handle; copies share the underlying node.
class Operator {
 public:
  using Variant = std::variant<ops::Dense, ops::Diagonal, ops::BackwardShift, ops::ForwardShift, ops::Scalar,
                               ops::Composition, ops::DirectSum, ops::RankOneFix, ops::Power>;

  Operator(Variant v, std::size_t dim);

  std::size_t dim() const noexcept;
  const Variant& variant() const noexcept;

  template <class T>
  const T* as() const noexcept;

  std::string kind_name() const;

 private:
  std::shared_ptr<const detail::OperatorNode> node_;
};

namespace ops {
struct Composition {
  Operator left;
  Operator right;
};
struct DirectSum {
  std::vector<Operator> parts;
};
struct Power {
  Operator base;
  std::uint64_t exponent;
};
}  // namespace ops

namespace detail {
struct OperatorNode {
  Operator::Variant v;
  std::size_t dim;
};
}  // namespace detail

inline Operator::Operator(Variant v, std::size_t dim)
    : node_(std::make_shared<const detail::OperatorNode>(detail::OperatorNode{std::move(v), dim})) {
  require(dim >= 1, ErrorKind::InvalidArgument, "operator dimension must be >= 1");
}

template <class T>
const T* Operator::as() const noexcept {
  return std::get_if<T>(&variant());
}

inline std::size_t Operator::dim() const noexcept { return node_->dim; }
inline const Operator::Variant& Operator::variant() const noexcept { return node_->v; }

inline std::string Operator::kind_name() const {
  static const char* names[] = {"dense",       "diagonal",    "backward_shift", "forward_shift", "scalar",
                                "composition", "direct_sum",  "rank_one_fix",   "power"};
  return names[variant().index()];
}

struct OperatorLimits {
  std::size_t materialize_cap = 2048;
  std::uint64_t power_budget = 1'000'000;
};

// ---------------------------------------------------------------- builders

inline Operator dense(CMatrix m) {
  require(m.rows() == m.cols() && m.rows() >= 1, ErrorKind::DimensionMismatch, "dense operator must be square");
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      require(std::isfinite(m(i, j).real()) && std::isfinite(m(i, j).imag()), ErrorKind::InvalidArgument,
              "dense operator entries must be finite");
  const auto n = static_cast<std::size_t>(m.rows());
  return Operator(ops::Dense{std::move(m)}, n);
}

inline Operator diagonal(CVector d) {
  const auto n = static_cast<std::size_t>(d.size());
  return Operator(ops::Diagonal{std::move(d)}, n);
}

inline Operator backward_shift(std::size_t dim, Complex weight = 1.0) {
  return Operator(ops::BackwardShift{weight}, dim);
}

inline Operator forward_shift(std::size_t dim, Complex weight = 1.0) {
  return Operator(ops::ForwardShift{weight}, dim);
}

inline Operator scalar(std::size_t dim, Complex a) { return Operator(ops::Scalar{a}, dim); }

inline Operator identity(std::size_t dim) { return scalar(dim, 1.0); }

inline Operator rank_one_fix(std::size_t dim) { return Operator(ops::RankOneFix{}, dim); }

/// left ∘ right. Products of scalars and diagonals are folded.
inline Operator compose(const Operator& left, const Operator& right) {
  require(left.dim() == right.dim(), ErrorKind::DimensionMismatch, "composition parts must share a dimension");
  const std::size_t n = left.dim();
  const auto* ls = left.as<ops::Scalar>();
  const auto* rs = right.as<ops::Scalar>();
  if (ls && rs) return scalar(n, ls->a * rs->a);
  const auto* ld = left.as<ops::Diagonal>();
  const auto* rd = right.as<ops::Diagonal>();
  if (ld && rd) return diagonal(ld->entries.cwiseProduct(rd->entries));
  if (ls && rd) return diagonal(ls->a * rd->entries);
  if (ld && rs) return diagonal(rs->a * ld->entries);
  return Operator(ops::Composition{left, right}, n);
}

inline Operator direct_sum(std::vector<Operator> parts) {
  require(!parts.empty(), ErrorKind::InvalidArgument, "direct sum needs at least one part");
  std::size_t n = 0;
  for (const auto& p : parts) n += p.dim();
  return Operator(ops::DirectSum{std::move(parts)}, n);
}

/// base^n with closed forms where the structure allows it.
inline Operator power(const Operator& base, std::uint64_t n) {
  const std::size_t dim = base.dim();
  if (n == 0) return identity(dim);
  if (n == 1) return base;
  if (const auto* s = base.as<ops::Scalar>()) return scalar(dim, ipow(s->a, n));
  if (const auto* d = base.as<ops::Diagonal>()) {
    CVector e(d->entries.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = ipow(d->entries[i], n);
    return diagonal(std::move(e));
  }
  if (base.as<ops::RankOneFix>()) return base;
  if (const auto* p = base.as<ops::Power>()) return power(p->base, p->exponent * n);
  return Operator(ops::Power{base, n}, dim);
}

// ---------------------------------------------------------------- action

namespace detail {

inline CVector apply_raw(const Operator& t, const CVector& x);

struct ApplyVisitor {
  const CVector& x;

  CVector operator()(const ops::Dense& d) const { return d.matrix * x; }
  CVector operator()(const ops::Diagonal& d) const { return d.entries.cwiseProduct(x); }
  CVector operator()(const ops::BackwardShift& s) const {
    const Eigen::Index n = x.size();
    CVector y = CVector::Zero(n);
    if (n > 1) y.head(n - 1) = s.weight * x.tail(n - 1);
    return y;
  }
  CVector operator()(const ops::ForwardShift& s) const {
    const Eigen::Index n = x.size();
    CVector y = CVector::Zero(n);
    if (n > 1) y.tail(n - 1) = s.weight * x.head(n - 1);
    return y;
  }
  CVector operator()(const ops::Scalar& s) const { return s.a * x; }
  CVector operator()(const ops::Composition& c) const { return apply_raw(c.left, apply_raw(c.right, x)); }
  CVector operator()(const ops::DirectSum& d) const {
    CVector y(x.size());
    Eigen::Index off = 0;
    for (const auto& p : d.parts) {
      const auto len = static_cast<Eigen::Index>(p.dim());
      y.segment(off, len) = apply_raw(p, x.segment(off, len));
      off += len;
    }
    return y;
  }
  CVector operator()(const ops::RankOneFix&) const {
    CVector y = CVector::Zero(x.size());
    y[0] = x[0];
    return y;
  }
  CVector operator()(const ops::Power& p) const {
    CVector y = x;
    for (std::uint64_t k = 0; k < p.exponent; ++k) y = apply_raw(p.base, y);
    return y;
  }
};

inline CVector apply_raw(const Operator& t, const CVector& x) {
  return std::visit(ApplyVisitor{x}, t.variant());
}

}  // namespace detail

inline Vector apply(const Operator& t, const Vector& x) {
  require(t.dim() == x.dim(), ErrorKind::DimensionMismatch,
          "operator dim " + std::to_string(t.dim()) + " vs vector dim " + std::to_string(x.dim()));
  return Vector(detail::apply_raw(t, x.coords()));
}

/// T^n x by n successive applications.
inline Vector power_apply(const Operator& t, std::uint64_t n, const Vector& x, const OperatorLimits& lim = {}) {
  require(t.dim() == x.dim(), ErrorKind::DimensionMismatch, "operator and vector dimensions differ");
  if (n > lim.power_budget)
    fail(ErrorKind::BudgetExceeded, "power " + std::to_string(n) + " exceeds budget " + std::to_string(lim.power_budget));
  CVector y = x.coords();
  for (std::uint64_t k = 0; k < n; ++k) y = detail::apply_raw(t, y);
  return Vector(std::move(y));
}

// ---------------------------------------------------------------- dense form

namespace detail {

inline CMatrix materialize_raw(const Operator& t);

struct MaterializeVisitor {
  std::size_t n;

  CMatrix operator()(const ops::Dense& d) const { return d.matrix; }
  CMatrix operator()(const ops::Diagonal& d) const { return d.entries.asDiagonal(); }
  CMatrix operator()(const ops::BackwardShift& s) const {
    CMatrix m = CMatrix::Zero(dim(), dim());
    for (Eigen::Index i = 0; i + 1 < dim(); ++i) m(i, i + 1) = s.weight;
    return m;
  }
  CMatrix operator()(const ops::ForwardShift& s) const {
    CMatrix m = CMatrix::Zero(dim(), dim());
    for (Eigen::Index i = 0; i + 1 < dim(); ++i) m(i + 1, i) = s.weight;
    return m;
  }
  CMatrix operator()(const ops::Scalar& s) const {
    return s.a * CMatrix::Identity(dim(), dim());
  }
  CMatrix operator()(const ops::Composition& c) const { return materialize_raw(c.left) * materialize_raw(c.right); }
  CMatrix operator()(const ops::DirectSum& d) const {
    CMatrix m = CMatrix::Zero(dim(), dim());
    Eigen::Index off = 0;
    for (const auto& p : d.parts) {
      const auto len = static_cast<Eigen::Index>(p.dim());
      m.block(off, off, len, len) = materialize_raw(p);
      off += len;
    }
    return m;
  }
  CMatrix operator()(const ops::RankOneFix&) const {
    CMatrix m = CMatrix::Zero(dim(), dim());
    m(0, 0) = 1.0;
    return m;
  }
  CMatrix operator()(const ops::Power& p) const { return matrix_power(materialize_raw(p.base), p.exponent); }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(n); }
};

inline CMatrix materialize_raw(const Operator& t) { return std::visit(MaterializeVisitor{t.dim()}, t.variant()); }

}  // namespace detail

/// Dense matrix whose i-th column is T e_i.
inline CMatrix materialize(const Operator& t, const OperatorLimits& lim = {}) {
  if (t.dim() > lim.materialize_cap)
    fail(ErrorKind::DimensionCapExceeded,
         "dim " + std::to_string(t.dim()) + " exceeds materialize cap " + std::to_string(lim.materialize_cap));
  return detail::materialize_raw(t);
}

// ---------------------------------------------------------------- norm

/// Euclidean operator norm. Exact for diagonal, scalar, shift, rank-one-fix
/// and direct sums of those; power iteration on the Gram matrix otherwise.
inline NormEstimate operator_norm(const Operator& t, const PowerIterationOptions& opt = {}) {
  const std::size_t n = t.dim();
  if (const auto* d = t.as<ops::Diagonal>()) return {d->entries.cwiseAbs().maxCoeff(), 0.0, 0};
  if (const auto* s = t.as<ops::Scalar>()) return {std::abs(s->a), 0.0, 0};
  if (const auto* s = t.as<ops::BackwardShift>()) return {n >= 2 ? std::abs(s->weight) : 0.0, 0.0, 0};
  if (const auto* s = t.as<ops::ForwardShift>()) return {n >= 2 ? std::abs(s->weight) : 0.0, 0.0, 0};
  if (t.as<ops::RankOneFix>()) return {1.0, 0.0, 0};
  if (const auto* ds = t.as<ops::DirectSum>()) {
    NormEstimate best;
    for (const auto& p : ds->parts) {
      const NormEstimate e = operator_norm(p, opt);
      if (e.value > best.value) best.value = e.value;
      best.error_bound = std::max(best.error_bound, e.error_bound);
      best.iterations += e.iterations;
    }
    return best;
  }
  return matrix_two_norm(materialize(t), opt);
}

/// Never-throwing upper bound on the operator norm.
inline double operator_norm_upper(const Operator& t) {
  try {
    return operator_norm(t).upper();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonConvergence) throw;
    return frobenius_upper_bound(materialize(t));
  }
}

/// Largest |(S - T) x| over unit x, estimated on the dense difference.
inline NormEstimate difference_norm(const Operator& s, const Operator& t) {
  require(s.dim() == t.dim(), ErrorKind::DimensionMismatch, "operator dimensions differ");
  return matrix_two_norm(materialize(s) - materialize(t));
}

// ---------------------------------------------------------------- windows

/// Regime in which truncated shift computations equal the sequence-space
/// result: inputs supported on the first support_bound coordinates and at
/// most power_bound applications.
struct TruncationWindow {
  std::size_t dim = 1;
  std::size_t support_bound = 1;
  std::uint64_t power_bound = 0;
};

namespace detail {
inline bool contains_forward_shift(const Operator& t) {
  if (t.as<ops::ForwardShift>()) return true;
  if (const auto* c = t.as<ops::Composition>()) return contains_forward_shift(c->left) || contains_forward_shift(c->right);
  if (const auto* p = t.as<ops::Power>()) return contains_forward_shift(p->base);
  if (const auto* d = t.as<ops::DirectSum>())
    return std::any_of(d->parts.begin(), d->parts.end(), [](const Operator& q) { return contains_forward_shift(q); });
  return false;
}
}  // namespace detail

/// Index of the last nonzero coordinate (1-based), 0 for the zero vector.
inline std::size_t support_of(const Vector& x) {
  for (std::size_t i = x.dim(); i > 0; --i)
    if (x[i - 1] != Complex(0.0, 0.0)) return i;
  return 0;
}

/// Rejects (operator, window) pairs outside the exactness regime.
inline void validate_window(const TruncationWindow& w, const Operator& t) {
  require(w.dim == t.dim(), ErrorKind::WindowViolation,
          "window dim " + std::to_string(w.dim) + " differs from operator dim " + std::to_string(t.dim()));
  require(w.support_bound >= 1 && w.support_bound <= w.dim, ErrorKind::WindowViolation,
          "support_bound must lie in [1, dim]");
  if (detail::contains_forward_shift(t))
    require(w.support_bound + w.power_bound <= w.dim, ErrorKind::WindowViolation,
            "forward shift exactness needs support_bound + power_bound <= dim");
}

inline void validate_window(const TruncationWindow& w, const Operator& t, const Vector& x, std::uint64_t max_power) {
  validate_window(w, t);
  require(support_of(x) <= w.support_bound, ErrorKind::WindowViolation,
          "vector support " + std::to_string(support_of(x)) + " exceeds support_bound " +
              std::to_string(w.support_bound));
  if (detail::contains_forward_shift(t))
    require(max_power <= w.power_bound, ErrorKind::WindowViolation,
            "power " + std::to_string(max_power) + " exceeds power_bound " + std::to_string(w.power_bound));
}

}  // namespace opdyn
