#pragma once

// Recurrence of vectors and of sets of operators, at finite enumeration
// budgets. Every negative answer here is relative to the budget it was
// computed with; results carry that budget so reports can say so.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/feasibility.hpp"
#include "opdyn/operator_sets.hpp"
#include "opdyn/parallel.hpp"

namespace opdyn {

/// One term of a witnessing sequence: ||T_k x - x|| at enumeration index k,
/// and optionally the point realizing a ball return.
struct RecurrenceWitness {
  std::size_t op_index = 0;
  double residual = 0.0;
  std::optional<Vector> point;
};

namespace detail {
inline void require_nonzero(const Vector& x) {
  // Recurrent vectors are nonzero by definition, although x = 0 satisfies the
  // residual formula trivially.
  if (x.is_zero()) fail(ErrorKind::ZeroVector, "recurrent vectors must be nonzero");
}

/// ||T_k x - x|| for k = 1..budget, NaN past the end of a finite set.
inline std::vector<double> residual_profile(const OperatorSet& g, const Vector& x, EnumerationBudget budget,
                                            NormKind nk, const Executor& exec) {
  std::vector<double> out(budget.max_index, std::numeric_limits<double>::quiet_NaN());
  const bool sequential = g.as<sets::Powers>() != nullptr || exec.workers <= 1;
  if (sequential) {
    for_each_image(g, x, budget, [&](std::size_t k, const Vector& tx) {
      out[k - 1] = norm(CVector(tx.coords() - x.coords()), nk);
      return true;
    });
    return out;
  }
  exec.parallel_for(budget.max_index, [&](std::size_t i) {
    if (auto t = g.at(i + 1)) out[i] = norm(CVector(apply(*t, x).coords() - x.coords()), nk);
  });
  return out;
}
}  // namespace detail

struct ResidualResult {
  /// +inf when the set produced no operators within budget.
  double min_residual = std::numeric_limits<double>::infinity();
  std::optional<RecurrenceWitness> witness;
  std::size_t evaluated = 0;
};

/// min_k ||T_k x - x|| over the budget, ties to the smallest index.
inline ResidualResult residual(const OperatorSet& g, const Vector& x, EnumerationBudget budget,
                               NormKind nk = NormKind::L2, const Executor& exec = {}) {
  detail::require_nonzero(x);
  const auto prof = detail::residual_profile(g, x, budget, nk, exec);
  ResidualResult r;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    if (std::isnan(prof[i])) break;
    ++r.evaluated;
    if (prof[i] < r.min_residual) {
      r.min_residual = prof[i];
      r.witness = RecurrenceWitness{i + 1, prof[i], std::nullopt};
    }
  }
  return r;
}

/// First index with ||T_k x - x|| < eps. nullopt means "not within budget",
/// never a proof of non-recurrence.
inline std::optional<RecurrenceWitness> is_eps_recurrent(const OperatorSet& g, const Vector& x, double eps,
                                                         EnumerationBudget budget, NormKind nk = NormKind::L2) {
  detail::require_nonzero(x);
  require(eps > 0.0, ErrorKind::InvalidArgument, "epsilon must be positive");
  std::optional<RecurrenceWitness> found;
  for_each_image(g, x, budget, [&](std::size_t k, const Vector& tx) {
    const double res = norm(CVector(tx.coords() - x.coords()), nk);
    if (res < eps) {
      found = RecurrenceWitness{k, res, std::nullopt};
      return false;
    }
    return true;
  });
  return found;
}

struct GdeltaResult {
  bool member = false;
  /// per_s[s-1]: first witness with residual < 1/s.
  std::vector<std::optional<RecurrenceWitness>> per_s;
  std::size_t budget = 0;
};

/// Finite truncation of Rec = ∩_s ∪_T {x : ||Tx - x|| < 1/s}: membership for
/// s = 1..s_max within the budget.
inline GdeltaResult gdelta_membership(const OperatorSet& g, const Vector& x, std::size_t s_max,
                                      EnumerationBudget budget, NormKind nk = NormKind::L2,
                                      const Executor& exec = {}) {
  detail::require_nonzero(x);
  require(s_max >= 1, ErrorKind::InvalidArgument, "s_max must be >= 1");
  const auto prof = detail::residual_profile(g, x, budget, nk, exec);
  GdeltaResult out;
  out.budget = budget.max_index;
  out.per_s.resize(s_max);
  out.member = true;
  for (std::size_t s = 1; s <= s_max; ++s) {
    const double eps = 1.0 / static_cast<double>(s);
    for (std::size_t i = 0; i < prof.size() && !std::isnan(prof[i]); ++i) {
      if (prof[i] < eps) {
        out.per_s[s - 1] = RecurrenceWitness{i + 1, prof[i], std::nullopt};
        break;
      }
    }
    if (!out.per_s[s - 1]) out.member = false;
  }
  const bool direct = is_eps_recurrent(g, x, 1.0 / static_cast<double>(s_max), budget, nk).has_value();
  if (direct != out.member) fail(ErrorKind::BoundViolation, "G-delta membership disagrees with the direct check");
  return out;
}

// ---------------------------------------------------------------- set recurrence

/// T(B) ∩ B ≠ ∅ witnessed by z: ||z - c|| <= r and ||Tz - c|| = value < r.
struct SetRecurrenceCertificate {
  Ball ball;
  std::size_t op_index;
  Vector z;
  double value;
  double margin;  // radius - value
};

struct BallOutcome {
  std::optional<SetRecurrenceCertificate> certificate;
  std::optional<std::string> solver_failure;
  /// Smallest feasibility value over the enumerated operators.
  double min_value = std::numeric_limits<double>::infinity();
  std::size_t min_value_index = 0;
  std::size_t evaluated = 0;
  /// Per-index feasibility values, when requested.
  std::vector<double> values;
  /// Lower bound on the feasibility value valid for every element of the set,
  /// when the set's structure provides one.
  std::optional<double> closed_form_lower_bound;
};

struct CertifyOptions {
  /// <= 0 selects 1e-6 * radius per ball.
  double margin = 0.0;
  bool record_values = false;
  FeasibilityOptions feasibility{};
  Executor exec{};
};

/// Lower bound on min ||T z - c|| valid for the whole set, for structures
/// where it is known in closed form. Powers of the rank-one fixer have range
/// span{e_1}, so ||Tz - c|| >= ||c - c_1 e_1|| for every element.
inline std::optional<double> closed_form_nonreturn_bound(const OperatorSet& g, const Ball& b) {
  if (const auto* p = g.as<sets::Powers>(); p && p->start_exponent >= 1 && p->base.as<ops::RankOneFix>()) {
    CVector rest = b.center.coords();
    rest[0] = 0.0;
    return rest.norm();
  }
  return std::nullopt;
}

namespace detail {
/// Pulls a boundary point slightly inside the ball; the image moves by at most
/// ||T|| * shrink * ||z - c||.
inline std::pair<Vector, double> refine_interior(const Operator& t, const Ball& b, const Vector& z, double value,
                                                 double margin) {
  const CVector w = z.coords() - b.center.coords();
  const double wn = w.norm();
  if (wn < b.radius * (1.0 - 1e-9)) return {z, value};
  const double tn = std::max(1.0, operator_norm_upper(t));
  const double shrink = std::min(0.5, margin / (2.0 * tn * std::max(wn, 1e-300)));
  Vector zi(CVector(b.center.coords() + (1.0 - shrink) * w));
  const double vi = (detail::apply_raw(t, zi.coords()) - b.center.coords()).norm();
  return {std::move(zi), vi};
}
}  // namespace detail

inline BallOutcome certify_ball(const OperatorSet& g, const Ball& b, EnumerationBudget budget,
                                const CertifyOptions& opt = {}) {
  require(b.radius > 0.0, ErrorKind::InvalidArgument, "certification balls need positive radius");
  require(b.dim() == g.dim(), ErrorKind::DimensionMismatch, "ball and set dimensions differ");
  const double margin = opt.margin > 0.0 ? opt.margin : 1e-6 * b.radius;
  BallOutcome out;
  out.closed_form_lower_bound = closed_form_nonreturn_bound(g, b);
  for (std::size_t k = 1; k <= budget.max_index; ++k) {
    auto t = g.at(k);
    if (!t) break;
    std::optional<FeasibilityResult> f;
    try {
      f = ball_return_feasibility(*t, b, opt.feasibility);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SolverFailure) throw;
      out.solver_failure = "index " + std::to_string(k) + ": " + e.what();
      return out;
    }
    ++out.evaluated;
    if (opt.record_values) out.values.push_back(f->value);
    if (f->value < out.min_value) {
      out.min_value = f->value;
      out.min_value_index = k;
    }
    if (!out.certificate && f->value <= b.radius - margin) {
      auto [z, v] = detail::refine_interior(*t, b, f->z, f->value, margin);
      if (v < b.radius) out.certificate = SetRecurrenceCertificate{b, k, std::move(z), v, b.radius - v};
    }
    // keep scanning past the certificate only to record the full profile
    if (out.certificate && !opt.record_values) break;
  }
  return out;
}

/// For each ball, the first enumerated operator whose feasibility value is at
/// most radius - margin, with the point z. A solver failure on one ball is
/// recorded on that ball and does not abort the batch.
inline std::vector<BallOutcome> certify_recurrent_set(const OperatorSet& g, const std::vector<Ball>& balls,
                                                      EnumerationBudget budget, const CertifyOptions& opt = {}) {
  std::vector<BallOutcome> out(balls.size());
  opt.exec.parallel_for(balls.size(), [&](std::size_t i) {
    try {
      out[i] = certify_ball(g, balls[i], budget, opt);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SolverFailure) throw;
      out[i].solver_failure = e.what();
    }
  });
  return out;
}

// ---------------------------------------------------------------- construction

struct NestedBallStep {
  std::size_t op_index;
  Vector x;            // x_k
  double radius;       // r_k
  double return_value; // ||T_k x_k - x_{k-1}||
  double op_norm;      // upper bound on ||T_k|| used for r_k
};

struct NestedBallTrace {
  Vector start;
  double start_radius;  // r_0 actually used
  std::vector<NestedBallStep> steps;
  std::optional<Vector> y;
  /// certified_bounds[k-1] = 2 r_{k-1} >= ||T_k y - y||
  std::vector<double> certified_bounds;
  /// ||T_k y - y| recomputed after the construction
  std::vector<double> verified_residuals;
};

class StepFailed : public Error {
 public:
  StepFailed(std::size_t step, NestedBallTrace partial)
      : Error(ErrorKind::StepFailed,
              "no enumerated operator returns the shrunken ball at step " + std::to_string(step) + " (within budget)"),
        step_(step), partial_(std::move(partial)) {}

  std::size_t step() const noexcept { return step_; }
  const NestedBallTrace& partial() const noexcept { return partial_; }

 private:
  std::size_t step_;
  NestedBallTrace partial_;
};

struct ConstructOptions {
  FeasibilityOptions feasibility{};
};

/// Nested-ball construction of a recurrent vector inside b.
///
/// Step k searches the enumeration for T_k and x_k with
///   ||x_k - x_{k-1}|| <= (1 - theta) r_{k-1},  ||T_k x_k - x_{k-1}|| = v_k <= (1 - theta) r_{k-1}
/// and sets r_k = min(2^-(k+1), theta r_{k-1}, theta (r_{k-1} - v_k) / max(1, ||T_k||)), which gives
///   B(x_k, r_k) ⊆ B(x_{k-1}, r_{k-1})   and   T_k B(x_k, r_k) ⊆ B(x_{k-1}, r_{k-1}).
/// The starting radius is min(radius, 1/2). Then y = x_K lies in every ball, so
/// ||T_k y - y|| <= 2 r_{k-1} <= 2^(1-k); the bounds are re-verified on y.
inline NestedBallTrace construct_recurrent_vector(const OperatorSet& g, const Ball& b, std::size_t steps,
                                                  double theta, EnumerationBudget budget,
                                                  const ConstructOptions& opt = {}) {
  require(b.dim() == g.dim(), ErrorKind::DimensionMismatch, "ball and set dimensions differ");
  require(b.radius > 0.0 && b.radius < 1.0, ErrorKind::InvalidArgument, "construction needs 0 < radius < 1");
  require(steps >= 1, ErrorKind::InvalidArgument, "steps must be >= 1");
  require(theta > 0.0 && theta < 1.0, ErrorKind::InvalidArgument, "theta must lie in (0, 1)");

  NestedBallTrace trace{b.center, std::min(b.radius, 0.5), {}, std::nullopt, {}, {}};
  std::vector<Operator> chosen;
  Vector prev = b.center;
  double prev_r = trace.start_radius;

  for (std::size_t k = 1; k <= steps; ++k) {
    const Ball shrunk(prev, (1.0 - theta) * prev_r);
    bool found = false;
    for (std::size_t j = 1; j <= budget.max_index && !found; ++j) {
      auto t = g.at(j);
      if (!t) break;
      auto f = ball_return_feasibility(*t, shrunk, opt.feasibility);
      if (f.value > shrunk.radius) continue;
      const double tn = operator_norm_upper(*t);
      const double cap = std::ldexp(1.0, -static_cast<int>(k + 1));
      const double r = std::min({cap, theta * prev_r, theta * (prev_r - f.value) / std::max(1.0, tn)});
      trace.steps.push_back({j, f.z, r, f.value, tn});
      chosen.push_back(*t);
      trace.certified_bounds.push_back(2.0 * prev_r);
      prev = f.z;
      prev_r = r;
      found = true;
    }
    if (!found) throw StepFailed(k, trace);
  }

  trace.y = prev;
  const Vector& y = *trace.y;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const double res = distance(apply(chosen[k], y), y);
    trace.verified_residuals.push_back(res);
    if (res > trace.certified_bounds[k] + 1e-12)
      fail(ErrorKind::BoundViolation, "step " + std::to_string(k + 1) + ": ||T_k y - y|| = " + std::to_string(res) +
                                          " exceeds certified bound " + std::to_string(trace.certified_bounds[k]));
  }
  return trace;
}

// ---------------------------------------------------------------- density diagnostic

/// Fraction of probes within delta of some orbit point T_k x. Evidence about
/// density of the orbit, not proof.
inline double orbit_covering_ratio(const OperatorSet& g, const Vector& x, const std::vector<Vector>& probes,
                                   double delta, EnumerationBudget budget) {
  require(delta > 0.0, ErrorKind::InvalidArgument, "delta must be positive");
  if (probes.empty()) return 0.0;
  std::vector<CVector> orbit;
  for_each_image(g, x, budget, [&](std::size_t, const Vector& tx) {
    orbit.push_back(tx.coords());
    return true;
  });
  std::size_t hit = 0;
  for (const auto& p : probes) {
    require(p.dim() == x.dim(), ErrorKind::DimensionMismatch, "probe dimension differs");
    for (const auto& o : orbit) {
      if ((o - p.coords()).norm() < delta) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(probes.size());
}

}  // namespace opdyn
