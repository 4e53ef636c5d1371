#pragma once

// Sets of operators as deterministic indexed enumerations k = 1, 2, ...

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opdyn/creg_group.hpp"
#include "opdyn/operators.hpp"
#include "opdyn/sequences.hpp"

namespace opdyn {

struct EnumerationBudget {
  explicit EnumerationBudget(std::size_t n) : max_index(n) {
    require(n >= 1, ErrorKind::InvalidArgument, "enumeration budget must be >= 1");
  }
  std::size_t max_index;
};

enum class DirectSumMode { Diagonal, Product };

inline std::string to_string(DirectSumMode m) { return m == DirectSumMode::Diagonal ? "diagonal" : "product"; }

struct SetTolerances {
  double unimodular = 1e-12;
  double inverse = 1e-10;
};

class OperatorSet;

namespace sets {
struct FiniteList {
  std::vector<Operator> ops;
};
/// T^start, T^(start+1), ...
struct Powers {
  Operator base;
  std::uint64_t start_exponent;
};
/// a_k I
struct ScalarFamily {
  Sequence a;
};
/// lambda_k T_k
struct UnimodularScaled;
/// Diagonal: index k pairs the k-th element of every part.
/// Product: every combination of finite parts, mixed-radix, last part fastest.
struct DirectSumSet;
/// phi T_k phi^{-1}
struct ConjugateSet;
/// S(z_k) over a finite ordered grid.
struct CRegGrid {
  CRegGroup group;
  std::vector<Complex> grid;
};
}  // namespace sets

class OperatorSet {
 public:
  using Variant = std::variant<sets::FiniteList, sets::Powers, sets::ScalarFamily, sets::UnimodularScaled,
                               sets::DirectSumSet, sets::ConjugateSet, sets::CRegGrid>;

  OperatorSet(Variant v, std::size_t dim);

  std::size_t dim() const noexcept;
  const Variant& variant() const noexcept;
  template <class T>
  const T* as() const noexcept;
  std::string kind_name() const;

  /// k-th element (k >= 1); nullopt once a finite set is exhausted.
  std::optional<Operator> at(std::size_t k) const;

  /// Number of elements for finite sets.
  std::optional<std::size_t> size() const;

 private:
  std::shared_ptr<const std::pair<Variant, std::size_t>> node_;
};

namespace sets {
struct UnimodularScaled {
  OperatorSet base;
  Sequence lambda;
};
struct DirectSumSet {
  std::vector<OperatorSet> parts;
  DirectSumMode mode;
};
struct ConjugateSet {
  OperatorSet base;
  Operator phi;
  Operator phi_inv;
};
}  // namespace sets

inline OperatorSet::OperatorSet(Variant v, std::size_t dim)
    : node_(std::make_shared<const std::pair<Variant, std::size_t>>(std::move(v), dim)) {}

template <class T>
const T* OperatorSet::as() const noexcept {
  return std::get_if<T>(&variant());
}

inline std::size_t OperatorSet::dim() const noexcept { return node_->second; }
inline const OperatorSet::Variant& OperatorSet::variant() const noexcept { return node_->first; }

inline std::string OperatorSet::kind_name() const {
  static const char* names[] = {"finite_list",  "powers",    "scalar_family", "unimodular_scaled",
                                "direct_sum",   "conjugate", "creg_grid"};
  return names[variant().index()];
}

inline std::optional<std::size_t> OperatorSet::size() const {
  return std::visit(
      [](const auto& s) -> std::optional<std::size_t> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, sets::FiniteList>) {
          return s.ops.size();
        } else if constexpr (std::is_same_v<S, sets::CRegGrid>) {
          return s.grid.size();
        } else if constexpr (std::is_same_v<S, sets::ScalarFamily>) {
          return s.a.size();
        } else if constexpr (std::is_same_v<S, sets::UnimodularScaled>) {
          auto b = s.base.size();
          auto l = s.lambda.size();
          if (b && l) return std::min(*b, *l);
          return b ? b : l;
        } else if constexpr (std::is_same_v<S, sets::ConjugateSet>) {
          return s.base.size();
        } else if constexpr (std::is_same_v<S, sets::DirectSumSet>) {
          std::optional<std::size_t> out;
          for (const auto& p : s.parts) {
            auto n = p.size();
            if (s.mode == DirectSumMode::Product) {
              out = out.value_or(1) * n.value();
            } else if (n) {
              out = out ? std::min(*out, *n) : *n;
            }
          }
          return out;
        } else {
          return std::nullopt;
        }
      },
      variant());
}

inline std::optional<Operator> OperatorSet::at(std::size_t k) const {
  if (k == 0) return std::nullopt;
  const std::size_t n = dim();
  return std::visit(
      [&](const auto& s) -> std::optional<Operator> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, sets::FiniteList>) {
          if (k > s.ops.size()) return std::nullopt;
          return s.ops[k - 1];
        } else if constexpr (std::is_same_v<S, sets::Powers>) {
          return power(s.base, s.start_exponent + k - 1);
        } else if constexpr (std::is_same_v<S, sets::ScalarFamily>) {
          auto a = s.a.at(k);
          if (!a) return std::nullopt;
          return scalar(n, *a);
        } else if constexpr (std::is_same_v<S, sets::UnimodularScaled>) {
          auto t = s.base.at(k);
          auto l = s.lambda.at(k);
          if (!t || !l) return std::nullopt;
          if (std::abs(std::abs(*l) - 1.0) > 1e-12)
            fail(ErrorKind::NotUnimodular, "|lambda_" + std::to_string(k) + "| = " + std::to_string(std::abs(*l)));
          return compose(scalar(n, *l), *t);
        } else if constexpr (std::is_same_v<S, sets::DirectSumSet>) {
          std::vector<Operator> parts;
          parts.reserve(s.parts.size());
          if (s.mode == DirectSumMode::Diagonal) {
            for (const auto& p : s.parts) {
              auto t = p.at(k);
              if (!t) return std::nullopt;
              parts.push_back(*t);
            }
          } else {
            auto total = size();
            if (k > total.value()) return std::nullopt;
            std::vector<std::size_t> digits(s.parts.size());
            std::size_t rest = k - 1;
            for (std::size_t i = s.parts.size(); i-- > 0;) {
              const std::size_t radix = s.parts[i].size().value();
              digits[i] = rest % radix;
              rest /= radix;
            }
            for (std::size_t i = 0; i < s.parts.size(); ++i) parts.push_back(*s.parts[i].at(digits[i] + 1));
          }
          return direct_sum(std::move(parts));
        } else if constexpr (std::is_same_v<S, sets::ConjugateSet>) {
          auto t = s.base.at(k);
          if (!t) return std::nullopt;
          return compose(s.phi, compose(*t, s.phi_inv));
        } else {
          if (k > s.grid.size()) return std::nullopt;
          return evaluate(s.group, s.grid[k - 1]);
        }
      },
      variant());
}

struct IndexedOperator {
  std::size_t index;
  Operator op;
};

/// (index, operator) pairs for index = 1..max_index, stopping early when a
/// finite set runs out.
inline std::vector<IndexedOperator> enumerate(const OperatorSet& g, EnumerationBudget budget) {
  std::vector<IndexedOperator> out;
  for (std::size_t k = 1; k <= budget.max_index; ++k) {
    auto t = g.at(k);
    if (!t) break;
    out.push_back({k, std::move(*t)});
  }
  return out;
}

/// Calls fn(k, T_k x) for k = 1..budget. Power families are advanced
/// incrementally so the whole orbit costs budget applications.
inline std::size_t for_each_image(const OperatorSet& g, const Vector& x, EnumerationBudget budget,
                                  const std::function<bool(std::size_t, const Vector&)>& fn) {
  require(g.dim() == x.dim(), ErrorKind::DimensionMismatch, "set and vector dimensions differ");
  if (const auto* p = g.as<sets::Powers>(); p && !p->base.as<ops::Scalar>() && !p->base.as<ops::Diagonal>()) {
    Vector y = power_apply(p->base, p->start_exponent, x);
    for (std::size_t k = 1; k <= budget.max_index; ++k) {
      if (k > 1) y = apply(p->base, y);
      if (!fn(k, y)) return k;
    }
    return budget.max_index;
  }
  std::size_t k = 1;
  for (; k <= budget.max_index; ++k) {
    auto t = g.at(k);
    if (!t) return k - 1;
    if (!fn(k, apply(*t, x))) return k;
  }
  return budget.max_index;
}

// ---------------------------------------------------------------- builders

inline OperatorSet finite_list(std::vector<Operator> ops) {
  require(!ops.empty(), ErrorKind::InvalidArgument, "finite list needs at least one operator");
  const std::size_t n = ops.front().dim();
  for (const auto& t : ops) require(t.dim() == n, ErrorKind::DimensionMismatch, "finite list dimensions differ");
  return OperatorSet(sets::FiniteList{std::move(ops)}, n);
}

/// Start exponent 1 by default: with exponent 0 the identity joins the set
/// and every ball trivially returns.
inline OperatorSet powers(Operator base, std::uint64_t start_exponent = 1) {
  const std::size_t n = base.dim();
  return OperatorSet(sets::Powers{std::move(base), start_exponent}, n);
}

inline OperatorSet scalar_family(std::size_t dim, Sequence a) {
  require(dim >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
  return OperatorSet(sets::ScalarFamily{std::move(a)}, dim);
}

inline OperatorSet unimodular_scaled(OperatorSet base, Sequence lambda, const SetTolerances& tol = {}) {
  if (!lambda.unimodular(tol.unimodular))
    fail(ErrorKind::NotUnimodular, "sequence " + lambda.kind_name() + " has terms off the unit circle");
  const std::size_t n = base.dim();
  return OperatorSet(sets::UnimodularScaled{std::move(base), std::move(lambda)}, n);
}

inline OperatorSet direct_sum_set(std::vector<OperatorSet> parts, DirectSumMode mode = DirectSumMode::Diagonal) {
  require(!parts.empty(), ErrorKind::InvalidArgument, "direct sum set needs at least one part");
  std::size_t n = 0;
  for (const auto& p : parts) {
    n += p.dim();
    if (mode == DirectSumMode::Product)
      require(p.as<sets::FiniteList>() != nullptr, ErrorKind::InvalidArgument,
              "product mode is only available for finite_list parts");
  }
  return OperatorSet(sets::DirectSumSet{std::move(parts), mode}, n);
}

/// phi Gamma phi^{-1}; requires ||phi phi^{-1} - I|| <= tol.
inline OperatorSet conjugate_set(OperatorSet base, Operator phi, Operator phi_inv, const SetTolerances& tol = {}) {
  require(phi.dim() == base.dim() && phi_inv.dim() == base.dim(), ErrorKind::DimensionMismatch,
          "conjugating operators must match the set dimension");
  const CMatrix prod = materialize(phi) * materialize(phi_inv);
  const CMatrix eye = CMatrix::Identity(prod.rows(), prod.cols());
  const double defect = (prod - eye).isZero(0.0) ? 0.0 : matrix_two_norm_upper(prod - eye);
  if (defect > tol.inverse) fail(ErrorKind::NotInvertible, "||phi phi^-1 - I|| = " + std::to_string(defect));
  const std::size_t n = base.dim();
  return OperatorSet(sets::ConjugateSet{std::move(base), std::move(phi), std::move(phi_inv)}, n);
}

inline OperatorSet creg_grid(CRegGroup group, std::vector<Complex> grid) {
  require(!grid.empty(), ErrorKind::InvalidArgument, "grid must be nonempty");
  const std::size_t n = group.dim();
  return OperatorSet(sets::CRegGrid{std::move(group), std::move(grid)}, n);
}

}  // namespace opdyn
