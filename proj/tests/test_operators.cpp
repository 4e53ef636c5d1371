#include <catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "opdyn/operators.hpp"
#include "oracles.hpp"

using namespace opdyn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CMatrix random_matrix(std::mt19937_64& g, std::size_t n) {
  return oracle::gaussian(g, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an opdyn::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("backward shift and rank-one fixer act as specified", "[operators]") {
  const auto b = backward_shift(8, 2.0);
  CHECK(apply(b, Vector::basis(8, 2)) == Complex(2.0) * Vector::basis(8, 1));
  CHECK(apply(b, Vector::basis(8, 1)).is_zero());

  const auto t = rank_one_fix(4);
  CHECK(apply(t, Vector::basis(4, 1)) == Vector::basis(4, 1));
  CHECK(apply(t, Vector::basis(4, 2)).is_zero());
  for (std::uint64_t n : {1u, 2u, 17u, 1000u}) CHECK(power_apply(t, n, Vector::basis(4, 1)) == Vector::basis(4, 1));

  const auto f = forward_shift(3, Complex(0, 1));
  CHECK(apply(f, Vector::basis(3, 1)) == Complex(0, 1) * Vector::basis(3, 2));
  CHECK(apply(f, Vector::basis(3, 3)).is_zero());
}

TEST_CASE("power and power_apply agree", "[operators]") {
  std::mt19937_64 g(11);
  const auto a = dense(random_matrix(g, 4) / 3.0);
  const Vector x(oracle::gaussian(g, 4));
  for (std::uint64_t n : {0u, 1u, 2u, 7u}) {
    const auto lhs = apply(power(a, n), x);
    const auto rhs = power_apply(a, n, x);
    CHECK(distance(lhs, rhs) < 1e-12);
  }
  CHECK(power(scalar(2, Complex(0, 1)), 4).as<ops::Scalar>()->a == Complex(1, 0));
  CHECK(power(power(a, 2), 3).as<ops::Power>()->exponent == 6);
  CHECK(kind_of([&] { power_apply(a, 10, x, OperatorLimits{2048, 5}); }) == ErrorKind::BudgetExceeded);
}

TEST_CASE("composition folds scalars and diagonals", "[operators]") {
  const auto s = scalar(3, 2.0);
  CVector d(3);
  d << 1.0, Complex(0, 1), -1.0;
  const auto dg = diagonal(d);
  CHECK(compose(s, s).as<ops::Scalar>());
  CHECK(compose(s, dg).as<ops::Diagonal>());
  CHECK(compose(dg, dg).as<ops::Diagonal>());
  CHECK(compose(backward_shift(3), dg).as<ops::Composition>());
  CHECK(kind_of([&] { compose(s, scalar(2, 1.0)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("structural action agrees with the dense form", "[operators][property]") {
  std::mt19937_64 g(5);
  std::uniform_int_distribution<int> dims(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(dims(g));
    const Complex w(std::normal_distribution<double>(0, 1)(g), 0.3);
    std::vector<Operator> cands{dense(random_matrix(g, n)),
                                diagonal(oracle::gaussian(g, static_cast<Eigen::Index>(n))),
                                backward_shift(n, w),
                                forward_shift(n, w),
                                scalar(n, w),
                                rank_one_fix(n)};
    cands.push_back(compose(cands[0], cands[2]));
    cands.push_back(power(cands[0], 3));
    cands.push_back(direct_sum({cands[2], cands[5]}));
    const Vector x(oracle::gaussian(g, static_cast<Eigen::Index>(n)));
    for (const auto& t : cands) {
      const Eigen::Index m = static_cast<Eigen::Index>(t.dim());
      Vector xx = t.dim() == n ? x : Vector(oracle::gaussian(g, m));
      const CVector dense_result = materialize(t) * xx.coords();
      REQUIRE((apply(t, xx).coords() - dense_result).norm() <= 1e-10 * (1.0 + dense_result.norm()));
    }
  }
}

TEST_CASE("shift truncation matches the sequence-space action inside the window", "[operators][property]") {
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> pick(1, 6);
  const std::size_t dim = 12;
  for (int trial = 0; trial < 300; ++trial) {
    const auto support = static_cast<std::size_t>(pick(g));
    const auto powr = static_cast<std::uint64_t>(pick(g));
    const Complex w(1.5, -0.5);
    CVector c = CVector::Zero(dim);
    c.head(static_cast<Eigen::Index>(support)) = oracle::gaussian(g, static_cast<Eigen::Index>(support));
    const Vector x(c);

    const auto fwd = forward_shift(dim, w);
    const TruncationWindow win{dim, support, powr};
    REQUIRE_NOTHROW(validate_window(win, fwd, x, powr));
    auto seq = oracle::from_vector(c);
    Vector y = x;
    for (std::uint64_t k = 0; k < powr; ++k) {
      seq = oracle::forward_shift(seq, w);
      y = apply(fwd, y);
    }
    REQUIRE(oracle::support(seq) <= static_cast<long>(dim));
    REQUIRE((y.coords() - oracle::to_vector(seq, dim)).norm() <= 1e-12 * (1.0 + y.coords().norm()));

    auto bseq = oracle::from_vector(c);
    Vector by = x;
    for (std::uint64_t k = 0; k < powr; ++k) {
      bseq = oracle::backward_shift(bseq, w);
      by = apply(backward_shift(dim, w), by);
    }
    REQUIRE((by.coords() - oracle::to_vector(bseq, dim)).norm() <= 1e-12 * (1.0 + by.coords().norm()));
  }
}

TEST_CASE("window violations are rejected", "[operators]") {
  const auto f = forward_shift(8);
  CHECK(kind_of([&] { validate_window({8, 6, 5}, f); }) == ErrorKind::WindowViolation);
  CHECK_NOTHROW(validate_window({8, 3, 5}, f));
  CHECK(kind_of([&] { validate_window({8, 3, 5}, f, Vector::basis(8, 4), 1); }) == ErrorKind::WindowViolation);
  CHECK(kind_of([&] { validate_window({8, 3, 5}, f, Vector::basis(8, 1), 6); }) == ErrorKind::WindowViolation);
  CHECK(kind_of([&] { validate_window({7, 3, 2}, f); }) == ErrorKind::WindowViolation);
  // backward shifts only lose mass at e_1, which the sequence-space operator does too
  CHECK_NOTHROW(validate_window({8, 6, 5}, backward_shift(8, 2.0), Vector::basis(8, 6), 5));
}

TEST_CASE("operator norms", "[operators]") {
  CHECK(operator_norm(backward_shift(8, 2.0)).value == 2.0);
  CHECK(operator_norm(backward_shift(1, 2.0)).value == 0.0);
  CHECK(operator_norm(rank_one_fix(4)).value == 1.0);
  CHECK(operator_norm(scalar(3, Complex(3, 4))).value == 5.0);
  CVector d(3);
  d << 0.5, Complex(0, -2), 1.0;
  CHECK(operator_norm(diagonal(d)).value == 2.0);
  CHECK(operator_norm(direct_sum({diagonal(d), scalar(2, 3.0)})).value == 3.0);
}

TEST_CASE("dense norm matches an SVD and bounds every tested ratio", "[operators][property]") {
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> dims(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(dims(g));
    const CMatrix m = random_matrix(g, n);
    const auto est = operator_norm(dense(m));
    const double ref = oracle::two_norm(m);
    REQUIRE_THAT(est.value, WithinRel(ref, 1e-8));
    REQUIRE(est.upper() >= ref * (1.0 - 1e-12));
    for (int k = 0; k < 20; ++k) {
      const CVector x = oracle::gaussian(g, static_cast<Eigen::Index>(n));
      REQUIRE(est.value >= (m * x).norm() / x.norm() - 1e-9);
    }
  }
}

TEST_CASE("materialize cap", "[operators]") {
  CHECK(kind_of([] { materialize(scalar(10, 1.0), OperatorLimits{4, 10}); }) == ErrorKind::DimensionCapExceeded);
  CHECK(materialize(rank_one_fix(3))(0, 0) == Complex(1.0));
  CHECK_THROWS_AS(dense(CMatrix::Zero(2, 3)), Error);
}

TEST_CASE("non-converging power iteration reports NonConvergence", "[operators]") {
  // two equal-modulus top singular values with a tiny iteration cap
  CMatrix m = CMatrix::Identity(4, 4);
  m(0, 1) = 1e-3;
  PowerIterationOptions opt;
  opt.max_iterations = 1;
  opt.relative_tolerance = 1e-16;
  CHECK(kind_of([&] { matrix_two_norm(m, opt); }) == ErrorKind::NonConvergence);
  CHECK(operator_norm_upper(dense(m)) >= oracle::two_norm(m) - 1e-12);
}
