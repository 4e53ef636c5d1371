#pragma once

// Recurrence experiments on C-regularized groups S(z) = exp(zA) C.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/creg_group.hpp"
#include "opdyn/recurrence.hpp"
#include "opdyn/transforms.hpp"

namespace opdyn {

/// Finite ordered stand-in for z in C: explicit points first, then an
/// optional rectangle scanned with the real part varying slowest.
struct ComplexGrid {
  std::vector<Complex> points;
  std::string description;
};

struct GridRect {
  double re_lo, re_hi, im_lo, im_hi, step;
};

inline ComplexGrid make_grid(std::vector<Complex> extra, std::optional<GridRect> rect = std::nullopt,
                             std::size_t max_points = 1'000'000) {
  ComplexGrid g{std::move(extra), {}};
  g.description = std::to_string(g.points.size()) + " explicit points";
  if (rect) {
    require(rect->step > 0.0 && rect->re_hi >= rect->re_lo && rect->im_hi >= rect->im_lo, ErrorKind::InvalidArgument,
            "grid rectangle needs step > 0 and ordered bounds");
    const auto nre = static_cast<std::size_t>(std::floor((rect->re_hi - rect->re_lo) / rect->step + 1e-9)) + 1;
    const auto nim = static_cast<std::size_t>(std::floor((rect->im_hi - rect->im_lo) / rect->step + 1e-9)) + 1;
    if (nre * nim > max_points) fail(ErrorKind::GridTooLarge, "complex grid exceeds " + std::to_string(max_points) + " points");
    for (std::size_t i = 0; i < nre; ++i)
      for (std::size_t j = 0; j < nim; ++j)
        g.points.emplace_back(rect->re_lo + static_cast<double>(i) * rect->step,
                              rect->im_lo + static_cast<double>(j) * rect->step);
    g.description += " + rectangle [" + std::to_string(rect->re_lo) + "," + std::to_string(rect->re_hi) + "]x[" +
                     std::to_string(rect->im_lo) + "," + std::to_string(rect->im_hi) + "] step " +
                     std::to_string(rect->step);
  }
  require(!g.points.empty(), ErrorKind::InvalidArgument, "grid must be nonempty");
  return g;
}

struct AxiomsDefect {
  /// max ||S(z+w)C - S(z)S(w)|| over the samples
  double composition;
  /// ||S(0) - C||
  double initial;
};

/// Defects of S(0) = C and S(z+w)C = S(z)S(w). Entireness of z -> S(z)x holds
/// by construction for matrix exponentials and is not sampled.
inline AxiomsDefect axioms_defect(const CRegGroup& g, const std::vector<std::pair<Complex, Complex>>& samples,
                                  const GroupTolerances& tol = {}) {
  const CMatrix c = materialize(g.regularizer());
  const CMatrix s0 = materialize(evaluate(g, 0.0, tol));
  AxiomsDefect out{0.0, detail::dense_norm_or_zero(s0 - c)};
  for (const auto& [z, w] : samples) {
    const CMatrix lhs = materialize(evaluate(g, z + w, tol)) * c;
    const CMatrix rhs = materialize(evaluate(g, z, tol)) * materialize(evaluate(g, w, tol));
    out.composition = std::max(out.composition, detail::dense_norm_or_zero(lhs - rhs));
  }
  return out;
}

struct PeriodPoint {
  std::size_t grid_index;  // 1-based, as in the enumeration
  Complex z;
  /// ||S(z) - C|| <= 1e-12
  bool exact_return;
};

struct GroupScanResult {
  std::vector<BallOutcome> outcomes;
  /// Grid points 2 pi i k (k != 0) for the scalar exponential group.
  std::vector<PeriodPoint> period_points;
};

inline GroupScanResult group_recurrence_scan(const CRegGroup& g, const ComplexGrid& grid, const std::vector<Ball>& balls,
                                             const CertifyOptions& opt = {}) {
  const OperatorSet gamma = creg_grid(g, grid.points);
  GroupScanResult out;
  out.outcomes = certify_recurrent_set(gamma, balls, EnumerationBudget(grid.points.size()), opt);
  if (g.is_scalar_exponential()) {
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const Complex z = grid.points[i];
      const double k = z.imag() / (2.0 * kPi);
      if (std::abs(z.real()) > 1e-12 || std::abs(k - std::round(k)) > 1e-9 || std::round(k) == 0.0) continue;
      const double gap = difference_norm(evaluate(g, z), g.regularizer()).upper();
      out.period_points.push_back({i + 1, z, gap <= 1e-12});
    }
  }
  return out;
}

/// S(z) commutes with C (S(z)C = S(0+z)C = S(0)S(z) = C S(z)), so C maps a
/// witness at x to one at Cx with residual <= ||C|| res.
inline TransferredWitness c_image_witness(const CRegGroup& g, const ComplexGrid& grid, const Vector& x,
                                          const RecurrenceWitness& w, const TransferTolerances& tol = {}) {
  const OperatorSet gamma = creg_grid(g, grid.points);
  return commutant_pushforward(gamma, g.regularizer(), x, w, tol);
}

namespace detail {
/// phi^{-1} T phi, kept scalar when T is scalar.
inline Operator conjugate_by(const Operator& t, const Operator& phi, const Operator& phi_inv) {
  if (t.as<ops::Scalar>()) return t;
  return dense(materialize(phi_inv) * materialize(t) * materialize(phi));
}

inline void check_inverse(const Operator& phi, const Operator& phi_inv, double tol) {
  require(phi.dim() == phi_inv.dim(), ErrorKind::DimensionMismatch, "phi and phi^-1 dimensions differ");
  const CMatrix prod = materialize(phi) * materialize(phi_inv);
  const double d = dense_norm_or_zero(prod - CMatrix::Identity(prod.rows(), prod.cols()));
  if (d > tol) fail(ErrorKind::NotInvertible, "||phi phi^-1 - I|| = " + std::to_string(d));
}
}  // namespace detail

/// h(z) = phi^{-1} S(z) phi, realized as the group with generator phi^{-1} A phi
/// and regularizer phi^{-1} C phi.
inline CRegGroup similar_group(const CRegGroup& g, const Operator& phi, const Operator& phi_inv,
                               const GroupTolerances& tol = {}, double inverse_tol = 1e-10) {
  require(phi.dim() == g.dim(), ErrorKind::DimensionMismatch, "phi and group dimensions differ");
  detail::check_inverse(phi, phi_inv, inverse_tol);
  return build_group(detail::conjugate_by(g.generator(), phi, phi_inv),
                     detail::conjugate_by(g.regularizer(), phi, phi_inv), tol);
}

/// max over zs of ||h(z) - phi^{-1} S(z) phi||.
inline double conjugation_defect(const CRegGroup& g, const CRegGroup& h, const Operator& phi, const Operator& phi_inv,
                                 const std::vector<Complex>& zs) {
  double worst = 0.0;
  const CMatrix p = materialize(phi);
  const CMatrix pi = materialize(phi_inv);
  for (const auto& z : zs) {
    const CMatrix diff = materialize(evaluate(h, z)) - pi * materialize(evaluate(g, z)) * p;
    worst = std::max(worst, detail::dense_norm_or_zero(diff));
  }
  return worst;
}

/// Maps a certificate for S on B(c, r) to one for h on B(phi^{-1} c, ||phi^{-1}|| r):
/// h(z_k) phi^{-1} z = phi^{-1} S(z_k) z.
inline SetRecurrenceCertificate transfer_certificate(const CRegGroup& h, const ComplexGrid& grid,
                                                     const SetRecurrenceCertificate& cert, const Operator& phi_inv) {
  const double scale = operator_norm_upper(phi_inv);
  Ball ball(apply(phi_inv, cert.ball.center), scale * cert.ball.radius);
  Vector z = apply(phi_inv, cert.z);
  const Operator hk = evaluate(h, grid.points.at(cert.op_index - 1));
  const double value = distance(apply(hk, z), ball.center);
  const double bound = scale * cert.value;
  detail::check_bound(value, bound, 1e-9, "similarity certificate transfer");
  return {ball, cert.op_index, std::move(z), value, ball.radius - value};
}

/// Residual search for the single operator S(z0) through its powers.
inline ResidualResult single_operator_scan(const CRegGroup& g, Complex z0, const Vector& x, EnumerationBudget budget) {
  return residual(powers(evaluate(g, z0)), x, budget);
}

}  // namespace opdyn
