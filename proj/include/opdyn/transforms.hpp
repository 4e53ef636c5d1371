#pragma once

// Witness transfer: commutants, intertwiners, direct sums and unimodular
// rescaling. Each transfer recomputes the residual at the image point and
// checks it against the bound the corresponding invariance argument gives.

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/recurrence.hpp"

namespace opdyn {

struct TransferTolerances {
  double commutation = 1e-10;
  double pairing = 1e-10;
  double slack = 1e-9;
  double product_closure = 1e-9;
  double multiplicative = 1e-9;
};

struct TransferredWitness {
  Vector x;
  RecurrenceWitness witness;
  /// Upper bound the transfer guarantees for witness.residual.
  double bound;
  /// Commutation or intertwining defect of the operators used.
  double defect;
};

namespace detail {
inline double dense_norm_or_zero(const CMatrix& m) { return m.isZero(0.0) ? 0.0 : matrix_two_norm(m).upper(); }

inline Operator element(const OperatorSet& g, std::size_t k) {
  auto t = g.at(k);
  if (!t) fail(ErrorKind::InvalidArgument, "index " + std::to_string(k) + " is outside the set");
  return *t;
}

inline void check_bound(double value, double bound, double slack, const char* what) {
  if (value > bound + slack)
    fail(ErrorKind::BoundViolation, std::string(what) + ": residual " + std::to_string(value) + " exceeds bound " +
                                        std::to_string(bound));
}
}  // namespace detail

/// ||S phi - phi T|| for phi: X -> Y (dim Y x dim X), T on X, S on Y.
inline NormEstimate intertwining_defect(const CMatrix& phi, const Operator& t, const Operator& s) {
  require(phi.cols() == static_cast<Eigen::Index>(t.dim()) && phi.rows() == static_cast<Eigen::Index>(s.dim()),
          ErrorKind::DimensionMismatch, "intertwiner shape does not match the operators");
  const CMatrix diff = materialize(s) * phi - phi * materialize(t);
  if (diff.isZero(0.0)) return {};
  return matrix_two_norm(diff);
}

/// Full row rank with singular values >= 1e-10 * max: the finite-dimensional
/// stand-in for dense range.
inline bool has_dense_range(const CMatrix& phi, double rel_tol = 1e-10) {
  if (phi.rows() > phi.cols()) return false;
  Eigen::JacobiSVD<CMatrix> svd(phi);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return false;
  return sv[sv.size() - 1] >= rel_tol * sv[0];
}

/// S in the commutant of the witnessing operator T_k maps a witness at x to
/// one at Sx: ||T_k Sx - Sx|| = ||S(T_k x - x)|| <= ||S|| res, plus the
/// commutation defect times ||x|| when T_k S and S T_k differ slightly.
inline TransferredWitness commutant_pushforward(const OperatorSet& g, const Operator& s, const Vector& x,
                                                const RecurrenceWitness& w, const TransferTolerances& tol = {}) {
  require(s.dim() == g.dim() && x.dim() == g.dim(), ErrorKind::DimensionMismatch, "dimensions differ");
  const Operator t = detail::element(g, w.op_index);
  const CMatrix tm = materialize(t);
  const CMatrix sm = materialize(s);
  const double defect = detail::dense_norm_or_zero(tm * sm - sm * tm);
  if (defect > tol.commutation)
    fail(ErrorKind::NotCommuting, "||T_k S - S T_k|| = " + std::to_string(defect) + " at index " +
                                      std::to_string(w.op_index));
  Vector sx = apply(s, x);
  if (sx.is_zero()) fail(ErrorKind::ZeroImage, "Sx = 0 is excluded from recurrent vectors");

  const double res_x = distance(apply(t, x), x);
  const double res = distance(apply(t, sx), sx);
  const double bound = operator_norm_upper(s) * res_x + defect * norm(x);
  detail::check_bound(res, bound, tol.slack, "commutant pushforward");
  return {std::move(sx), {w.op_index, res, std::nullopt}, bound, defect};
}

/// Index map k -> index in the target set; identity when no explicit map is given.
struct Pairing {
  std::vector<std::size_t> explicit_map;

  std::size_t operator()(std::size_t k) const {
    if (explicit_map.empty()) return k;
    require(k >= 1 && k <= explicit_map.size(), ErrorKind::PairingDefect, "pairing has no entry for index " + std::to_string(k));
    return explicit_map[k - 1];
  }
};

/// Quasi-similarity transfer: with S_k phi ≈ phi T_k,
///   ||S_k phi x - phi x|| <= ||phi|| ||T_k x - x|| + ||S_k phi - phi T_k|| ||x||.
inline TransferredWitness pushforward_witness(const CMatrix& phi, const OperatorSet& g, const OperatorSet& g1,
                                              const Pairing& pairing, const Vector& x, const RecurrenceWitness& w,
                                              const TransferTolerances& tol = {}) {
  require(x.dim() == g.dim(), ErrorKind::DimensionMismatch, "vector and source set dimensions differ");
  const Operator t = detail::element(g, w.op_index);
  const std::size_t k1 = pairing(w.op_index);
  auto s_opt = g1.at(k1);
  if (!s_opt) fail(ErrorKind::PairingDefect, "paired index " + std::to_string(k1) + " is outside the target set");
  const Operator s = *s_opt;
  const double defect = intertwining_defect(phi, t, s).upper();
  if (defect > tol.pairing)
    fail(ErrorKind::PairingDefect, "||S phi - phi T|| = " + std::to_string(defect) + " at index " + std::to_string(w.op_index));

  Vector px(CVector(phi * x.coords()));
  if (px.is_zero()) fail(ErrorKind::ZeroImage, "phi x = 0 is excluded from recurrent vectors");
  const double phi_norm = matrix_two_norm_upper(phi);
  const double res_x = distance(apply(t, x), x);
  const double res = distance(apply(s, px), px);
  const double bound = phi_norm * res_x + defect * norm(x);
  detail::check_bound(res, bound, tol.slack, "quasi-similarity pushforward");
  return {std::move(px), {k1, res, std::nullopt}, bound, defect};
}

struct ComponentWitness {
  std::size_t component;  // 1-based
  std::size_t offset;     // first coordinate of the component in the sum
  std::size_t op_index;   // index in the component set
  double residual;
  /// x_i = 0: the component is flagged and carries no witness.
  bool zero_component;
};

struct DirectSumProjection {
  std::vector<ComponentWitness> components;
  double total_residual;
  /// |sum_i res_i^2 - res_total^2|
  double pythagorean_defect;
};

/// Splits a witness for a direct-sum set into per-component witnesses.
/// In the Euclidean norm the squared component residuals add up to the
/// squared total residual.
inline DirectSumProjection project_direct_sum_witness(const OperatorSet& g, const Vector& x, const RecurrenceWitness& w) {
  const auto* ds = g.as<sets::DirectSumSet>();
  if (!ds) fail(ErrorKind::NotDecomposable, "the set is not a direct sum of sets");
  const Operator t = detail::element(g, w.op_index);
  const auto* parts = t.as<ops::DirectSum>();
  if (!parts || parts->parts.size() != ds->parts.size())
    fail(ErrorKind::NotDecomposable, "the witnessing operator does not split along the summands");

  std::vector<std::size_t> indices(ds->parts.size(), w.op_index);
  if (ds->mode == DirectSumMode::Product) {
    std::size_t rest = w.op_index - 1;
    for (std::size_t i = ds->parts.size(); i-- > 0;) {
      const std::size_t radix = ds->parts[i].size().value();
      indices[i] = rest % radix + 1;
      rest /= radix;
    }
  }

  DirectSumProjection out{{}, distance(apply(t, x), x), 0.0};
  double sum_sq = 0.0;
  std::size_t off = 0;
  for (std::size_t i = 0; i < parts->parts.size(); ++i) {
    const Operator& ti = parts->parts[i];
    const auto len = static_cast<Eigen::Index>(ti.dim());
    Vector xi(CVector(x.coords().segment(static_cast<Eigen::Index>(off), len)));
    const double ri = distance(apply(ti, xi), xi);
    sum_sq += ri * ri;
    out.components.push_back({i + 1, off, indices[i], ri, xi.is_zero()});
    off += ti.dim();
  }
  out.pythagorean_defect = std::abs(sum_sq - out.total_residual * out.total_residual);
  return out;
}

// ---------------------------------------------------------------- unimodular rescaling

struct UnimodularTransferReport {
  std::optional<RecurrenceWitness> forward;           // Gamma, base budget
  std::optional<RecurrenceWitness> backward;          // Gamma_1, enlarged budget
  std::optional<RecurrenceWitness> forward_enlarged;  // Gamma, enlarged budget
  std::size_t budget;
  std::size_t enlarged_budget;
  std::size_t validated_pairs;
  /// Witness existence agrees when both sets are searched at the enlarged budget.
  bool agree;
};

namespace detail {
/// Index of T_j T_k in the enumeration, by structure for power families and
/// by search otherwise.
inline std::size_t product_index(const OperatorSet& g, std::size_t j, std::size_t k, std::size_t search_budget,
                                 const TransferTolerances& tol) {
  const CMatrix prod = materialize(element(g, j)) * materialize(element(g, k));
  const double scale = std::max(1.0, prod.norm());
  if (const auto* p = g.as<sets::Powers>()) {
    const std::size_t m = j + k + static_cast<std::size_t>(p->start_exponent) - 1;
    const CMatrix tm = materialize(element(g, m));
    if ((tm - prod).norm() > tol.product_closure * scale)
      fail(ErrorKind::NotProductClosed, "T_" + std::to_string(j) + " T_" + std::to_string(k) + " != T_" + std::to_string(m));
    return m;
  }
  for (std::size_t m = 1; m <= search_budget; ++m) {
    auto t = g.at(m);
    if (!t) break;
    if ((materialize(*t) - prod).norm() <= tol.product_closure * scale) return m;
  }
  fail(ErrorKind::NotProductClosed, "T_" + std::to_string(j) + " T_" + std::to_string(k) + " not found within budget");
}
}  // namespace detail

/// Searches witnesses at x for Gamma and for Gamma_1 = {lambda_k T_k}, after
/// validating on sampled pairs that Gamma is closed under composition and
/// that lambda is multiplicative along it. This is an experiment on the
/// equivalence Rec(Gamma) = Rec(Gamma_1), not a decision procedure.
inline UnimodularTransferReport unimodular_transfer_check(const OperatorSet& g, const Sequence& lambda, const Vector& x,
                                                          double eps, EnumerationBudget budget,
                                                          std::size_t enlargement = 10, std::size_t sample = 3,
                                                          const TransferTolerances& tol = {}) {
  require(enlargement >= 1, ErrorKind::InvalidArgument, "enlargement factor must be >= 1");
  const OperatorSet g1 = unimodular_scaled(g, lambda);
  const std::size_t big = budget.max_index * enlargement;

  std::size_t validated = 0;
  const std::size_t lim = std::min<std::size_t>(sample, budget.max_index);
  for (std::size_t j = 1; j <= lim; ++j) {
    for (std::size_t k = 1; k <= lim; ++k) {
      if (!g.at(j) || !g.at(k)) continue;
      const std::size_t m = detail::product_index(g, j, k, big, tol);
      const auto lj = lambda.at(j), lk = lambda.at(k), lm = lambda.at(m);
      if (!lj || !lk || !lm) fail(ErrorKind::NotMultiplicative, "lambda undefined at a composite index");
      if (std::abs(*lm - *lj * *lk) > tol.multiplicative)
        fail(ErrorKind::NotMultiplicative, "lambda_" + std::to_string(m) + " != lambda_" + std::to_string(j) +
                                               " lambda_" + std::to_string(k));
      ++validated;
    }
  }

  UnimodularTransferReport r;
  r.budget = budget.max_index;
  r.enlarged_budget = big;
  r.validated_pairs = validated;
  r.forward = is_eps_recurrent(g, x, eps, budget);
  r.backward = is_eps_recurrent(g1, x, eps, EnumerationBudget(big));
  r.forward_enlarged = r.forward ? r.forward : is_eps_recurrent(g, x, eps, EnumerationBudget(big));
  r.agree = r.forward_enlarged.has_value() == r.backward.has_value();
  return r;
}

}  // namespace opdyn
