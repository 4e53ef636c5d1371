#include <catch_amalgamated.hpp>

#include <random>

#include "opdyn/recurrence.hpp"
#include "oracles.hpp"

using namespace opdyn;
using Catch::Matchers::WithinAbs;

namespace {
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

TEST_CASE("residual on the rank-one fixer", "[recurrence]") {
  const auto g = powers(rank_one_fix(4));
  const auto r = residual(g, Vector::basis(4, 1), EnumerationBudget(50));
  CHECK(r.min_residual == 0.0);
  REQUIRE(r.witness);
  CHECK(r.witness->op_index == 1);
  CHECK(r.evaluated == 50);
}

TEST_CASE("zero vector is rejected", "[recurrence]") {
  const auto g = powers(rank_one_fix(2));
  CHECK(kind_of([&] { residual(g, Vector::zero(2), EnumerationBudget(3)); }) == ErrorKind::ZeroVector);
  CHECK(kind_of([&] { is_eps_recurrent(g, Vector::zero(2), 0.1, EnumerationBudget(3)); }) == ErrorKind::ZeroVector);
  CHECK(kind_of([&] { gdelta_membership(g, Vector::zero(2), 3, EnumerationBudget(3)); }) == ErrorKind::ZeroVector);
}

TEST_CASE("scalar family residual is ||x|| / N", "[recurrence][property]") {
  std::mt19937_64 g(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    const Vector x(oracle::gaussian(g, n));
    const std::size_t budget = 10 + static_cast<std::size_t>(trial) * 37;
    const auto r = residual(scalar_family(static_cast<std::size_t>(n), Sequence::one_plus_inverse()), x,
                            EnumerationBudget(budget));
    REQUIRE_THAT(r.min_residual, WithinAbs(norm(x) / static_cast<double>(budget), 1e-12));
    REQUIRE(r.witness->op_index == budget);
  }
}

TEST_CASE("residual matches a brute-force dense scan", "[recurrence][property]") {
  std::mt19937_64 g(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    const CMatrix m = oracle::gaussian(g, n, n) / (1.2 * std::sqrt(static_cast<double>(n)));
    const Vector x(oracle::gaussian(g, n));
    const auto r = residual(powers(dense(m)), x, EnumerationBudget(30));
    const auto [best, arg] = oracle::power_residual(m, x.coords(), 30);
    REQUIRE_THAT(r.min_residual, WithinAbs(best, 1e-10 * (1.0 + best)));
    REQUIRE(r.witness->op_index == arg);
  }
}

TEST_CASE("residual is independent of the worker count", "[recurrence]") {
  std::mt19937_64 g(6);
  std::vector<Operator> ops;
  for (int i = 0; i < 64; ++i) ops.push_back(dense(CMatrix::Identity(3, 3) + 0.05 * oracle::gaussian(g, 3, 3)));
  const auto set = finite_list(ops);
  const Vector x(oracle::gaussian(g, 3));
  const auto a = residual(set, x, EnumerationBudget(64), NormKind::L2, Executor{1});
  const auto b = residual(set, x, EnumerationBudget(64), NormKind::L2, Executor{4});
  CHECK(a.min_residual == b.min_residual);
  CHECK(a.witness->op_index == b.witness->op_index);
}

TEST_CASE("eps recurrence returns the first qualifying index", "[recurrence]") {
  const auto g = scalar_family(1, Sequence::one_plus_inverse());
  const auto w = is_eps_recurrent(g, Vector::basis(1, 1), 0.1, EnumerationBudget(100));
  REQUIRE(w);
  CHECK(w->op_index == 11);
  CHECK_FALSE(is_eps_recurrent(g, Vector::basis(1, 1), 0.1, EnumerationBudget(10)));
  CHECK(kind_of([&] { is_eps_recurrent(g, Vector::basis(1, 1), 0.0, EnumerationBudget(10)); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("G-delta membership", "[recurrence]") {
  const auto r = gdelta_membership(powers(rank_one_fix(3)), Vector::basis(3, 1), 10, EnumerationBudget(20));
  CHECK(r.member);
  for (const auto& w : r.per_s) {
    REQUIRE(w);
    CHECK(w->residual == 0.0);
  }
  const auto no = gdelta_membership(powers(rank_one_fix(3)), Vector::basis(3, 2), 10, EnumerationBudget(20));
  CHECK_FALSE(no.member);
}

TEST_CASE("set certification on the scalar family", "[recurrence]") {
  const auto g = scalar_family(2, Sequence::one_plus_inverse());
  std::vector<Ball> balls;
  for (const auto& c : grid_points(Ball(Vector::basis(2, 1), 1.0), 3)) balls.emplace_back(c, 0.2);
  CertifyOptions opt;
  opt.margin = 1e-6;
  const auto out = certify_recurrent_set(g, balls, EnumerationBudget(1000), opt);
  for (std::size_t i = 0; i < out.size(); ++i) {
    REQUIRE(out[i].certificate);
    const auto& c = *out[i].certificate;
    REQUIRE(balls[i].contains(c.z));
    const double v = distance(apply(*g.at(c.op_index), c.z), balls[i].center);
    REQUIRE_THAT(v, WithinAbs(c.value, 1e-12));
    REQUIRE(c.value <= balls[i].radius - 1e-6 + 1e-12);
  }
}

TEST_CASE("rank-one fixer never returns to B(e_2, 1/2)", "[recurrence]") {
  CertifyOptions opt;
  opt.record_values = true;
  const auto out = certify_ball(powers(rank_one_fix(4)), Ball(Vector::basis(4, 2), 0.5), EnumerationBudget(50), opt);
  CHECK_FALSE(out.certificate);
  REQUIRE(out.values.size() == 50);
  for (double v : out.values) CHECK_THAT(v, WithinAbs(1.0, 1e-9));
  REQUIRE(out.closed_form_lower_bound);
  CHECK_THAT(*out.closed_form_lower_bound, WithinAbs(1.0, 1e-15));
}

TEST_CASE("certify rejects degenerate balls", "[recurrence]") {
  const auto g = powers(rank_one_fix(2));
  CHECK(kind_of([&] { certify_ball(g, Ball(Vector::basis(2, 1), 0.0), EnumerationBudget(2)); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { certify_ball(g, Ball(Vector::basis(3, 1), 1.0), EnumerationBudget(2)); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("nested-ball construction meets its bounds", "[recurrence][property]") {
  std::mt19937_64 g(99);
  CVector ph(3);
  ph << std::polar(1.0, 2 * kPi / 3), std::polar(1.0, kPi / 2), -1.0;
  const std::vector<OperatorSet> families{scalar_family(3, Sequence::one_plus_inverse()),
                                          powers(scalar(3, std::polar(1.0, kPi / 4))), powers(diagonal(ph))};
  std::uniform_real_distribution<double> ur(0.05, 0.95);
  for (const auto& fam : families) {
    for (int trial = 0; trial < 4; ++trial) {
      const Ball b(Vector(oracle::gaussian(g, 3)), ur(g));
      const auto tr = construct_recurrent_vector(fam, b, 8, 0.5, EnumerationBudget(200000));
      REQUIRE(tr.y);
      REQUIRE(b.contains(*tr.y));
      REQUIRE(tr.verified_residuals.size() == 8);
      for (std::size_t k = 1; k <= 8; ++k) {
        REQUIRE(tr.verified_residuals[k - 1] <= tr.certified_bounds[k - 1] + 1e-12);
        REQUIRE(tr.verified_residuals[k - 1] <= std::ldexp(1.0, 1 - static_cast<int>(k)) + 1e-9);
      }
      for (std::size_t k = 1; k < tr.steps.size(); ++k) REQUIRE(tr.steps[k].radius <= tr.steps[k - 1].radius);
    }
  }
}

TEST_CASE("construction reports the failing step", "[recurrence]") {
  // 2I never returns small balls around e_1
  try {
    construct_recurrent_vector(powers(scalar(1, 2.0)), Ball(Vector::basis(1, 1), 0.1), 4, 0.5, EnumerationBudget(20));
    FAIL("expected StepFailed");
  } catch (const StepFailed& e) {
    CHECK(e.step() == 1);
    CHECK(e.partial().steps.empty());
    CHECK(e.kind() == ErrorKind::StepFailed);
  }
  CHECK(kind_of([] {
          construct_recurrent_vector(powers(rank_one_fix(1)), Ball(Vector::basis(1, 1), 1.5), 2, 0.5,
                                     EnumerationBudget(2));
        }) == ErrorKind::InvalidArgument);
}

TEST_CASE("orbit covering ratio", "[recurrence]") {
  const auto g = powers(scalar(1, std::polar(1.0, 1.0)));
  std::vector<Vector> probes;
  for (int k = 0; k < 16; ++k) probes.emplace_back(Vector{std::polar(1.0, 2 * kPi * k / 16.0)});
  probes.emplace_back(Vector{Complex(0.2, 0)});
  const double ratio = orbit_covering_ratio(g, Vector::basis(1, 1), probes, 0.05, EnumerationBudget(2000));
  // the circle is covered, the interior probe is not
  CHECK_THAT(ratio, WithinAbs(16.0 / 17.0, 1e-12));
}
