#pragma once

// Index-addressed complex sequences (n = 1, 2, ...) given in closed form.

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opdyn/core_space.hpp"

namespace opdyn {

/// a_n = 1 + scale / n
struct OnePlusInverse {
  double scale = 1.0;
};
/// a_n = exp(i n theta)
struct UnimodularPhase {
  double theta = 0.0;
};
/// a_n = values[n-1]; the sequence ends after the last value.
struct ExplicitList {
  std::vector<Complex> values;
};

class Sequence {
 public:
  using Variant = std::variant<OnePlusInverse, UnimodularPhase, ExplicitList>;

  Sequence(Variant v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  static Sequence one_plus_inverse(double scale = 1.0) { return Sequence(OnePlusInverse{scale}); }
  static Sequence phase(double theta) { return Sequence(UnimodularPhase{theta}); }
  static Sequence list(std::vector<Complex> values) { return Sequence(ExplicitList{std::move(values)}); }

  /// n-th term, n >= 1; nullopt past the end of a finite list.
  std::optional<Complex> at(std::size_t n) const {
    if (n == 0) return std::nullopt;
    if (const auto* s = std::get_if<OnePlusInverse>(&v_)) return Complex(1.0 + s->scale / static_cast<double>(n), 0.0);
    if (const auto* s = std::get_if<UnimodularPhase>(&v_)) return std::polar(1.0, static_cast<double>(n) * s->theta);
    const auto& l = std::get<ExplicitList>(v_);
    if (n > l.values.size()) return std::nullopt;
    return l.values[n - 1];
  }

  std::optional<std::size_t> size() const {
    if (const auto* l = std::get_if<ExplicitList>(&v_)) return l->values.size();
    return std::nullopt;
  }

  /// True when |a_n| = 1 holds for every n by construction or by inspection
  /// of every listed value (to tol).
  bool unimodular(double tol = 1e-12) const {
    if (std::holds_alternative<UnimodularPhase>(v_)) return true;
    if (const auto* s = std::get_if<OnePlusInverse>(&v_)) return s->scale == 0.0;
    for (const auto& a : std::get<ExplicitList>(v_).values)
      if (std::abs(std::abs(a) - 1.0) > tol) return false;
    return true;
  }

  std::string kind_name() const {
    switch (v_.index()) {
      case 0: return "one_plus_inverse";
      case 1: return "unimodular_phase";
      default: return "explicit_list";
    }
  }

  const Variant& variant() const noexcept { return v_; }

 private:
  Variant v_;
};

}  // namespace opdyn
