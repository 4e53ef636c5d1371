#include <catch_amalgamated.hpp>

#include <random>

#include "opdyn/transforms.hpp"
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

CMatrix poly(const CMatrix& a, std::initializer_list<Complex> coeffs) {
  CMatrix out = CMatrix::Zero(a.rows(), a.cols());
  CMatrix p = CMatrix::Identity(a.rows(), a.cols());
  for (const auto c : coeffs) {
    out += c * p;
    p = p * a;
  }
  return out;
}
}  // namespace

TEST_CASE("commutant pushforward obeys ||S|| res", "[transforms][property]") {
  std::mt19937_64 g(10);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    const CMatrix a = oracle::gaussian(g, n, n) / (1.5 * std::sqrt(static_cast<double>(n)));
    const auto set = powers(dense(a));
    const Operator s = dense(poly(a, {Complex(0.5), Complex(0.3, 0.1), Complex(-0.2)}));
    const Vector x(oracle::gaussian(g, n));
    const auto w = residual(set, x, EnumerationBudget(20));
    const auto tw = commutant_pushforward(set, s, x, *w.witness);
    const double direct = distance(apply(*set.at(w.witness->op_index), tw.x), tw.x);
    REQUIRE_THAT(tw.witness.residual, WithinAbs(direct, 1e-12));
    REQUIRE(tw.witness.residual <= oracle::two_norm(materialize(s)) * w.min_residual + 1e-9);
  }
}

TEST_CASE("commutant pushforward error paths", "[transforms]") {
  const auto set = powers(backward_shift(3, 2.0));
  const RecurrenceWitness w{1, 0.0, std::nullopt};
  CHECK(kind_of([&] { commutant_pushforward(set, forward_shift(3), Vector::basis(3, 1), w); }) ==
        ErrorKind::NotCommuting);
  CHECK(kind_of([&] {
          commutant_pushforward(powers(identity(2)), rank_one_fix(2), Vector::basis(2, 2), w);
        }) == ErrorKind::ZeroImage);
}

TEST_CASE("similarity pushforward", "[transforms][property]") {
  std::mt19937_64 g(20);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    const CMatrix phi = CMatrix::Identity(n, n) + 0.3 * oracle::gaussian(g, n, n) / std::sqrt(static_cast<double>(n));
    const CMatrix a = oracle::gaussian(g, n, n) / (1.5 * std::sqrt(static_cast<double>(n)));
    const auto gam = powers(dense(a));
    const auto gam1 = conjugate_set(gam, dense(phi), dense(phi.inverse()), SetTolerances{1e-12, 1e-8});
    const Vector x(oracle::gaussian(g, n));
    const auto w = residual(gam, x, EnumerationBudget(15));
    TransferTolerances tol;
    tol.pairing = 1e-8;
    const auto tw = pushforward_witness(phi, gam, gam1, Pairing{}, x, *w.witness, tol);
    REQUIRE(tw.witness.residual <= oracle::two_norm(phi) * w.min_residual + tw.defect * norm(x) + 1e-9);
    REQUIRE(has_dense_range(phi));
  }
}

TEST_CASE("pairing defects are reported", "[transforms]") {
  const auto gam = powers(scalar(2, 2.0));
  const auto gam1 = powers(scalar(2, 3.0));
  const CMatrix phi = CMatrix::Identity(2, 2);
  const RecurrenceWitness w{1, 1.0, std::nullopt};
  CHECK(kind_of([&] { pushforward_witness(phi, gam, gam1, Pairing{}, Vector::basis(2, 1), w); }) ==
        ErrorKind::PairingDefect);
  const auto fin = finite_list({scalar(2, 2.0)});
  CHECK(kind_of([&] { pushforward_witness(phi, gam, fin, Pairing{{5}}, Vector::basis(2, 1), w); }) ==
        ErrorKind::PairingDefect);
  CHECK_FALSE(has_dense_range(CMatrix::Zero(2, 2)));
  CHECK_FALSE(has_dense_range(CMatrix::Ones(3, 2)));
}

TEST_CASE("direct-sum witness splits with a Pythagorean identity", "[transforms][property]") {
  std::mt19937_64 g(30);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix a = oracle::gaussian(g, 2, 2) / 2.0;
    const auto set = direct_sum_set({powers(dense(a)), scalar_family(3, Sequence::one_plus_inverse()),
                                     powers(rank_one_fix(1))});
    CVector xc = oracle::gaussian(g, 6);
    if (trial % 5 == 0) xc.segment(2, 3).setZero();
    const Vector x(xc);
    const auto w = residual(set, x, EnumerationBudget(25));
    const auto p = project_direct_sum_witness(set, x, *w.witness);
    REQUIRE(p.components.size() == 3);
    REQUIRE(p.pythagorean_defect <= 1e-12);
    REQUIRE_THAT(p.total_residual, WithinAbs(w.min_residual, 1e-12));
    REQUIRE(p.components[1].zero_component == (trial % 5 == 0));
  }
}

TEST_CASE("direct-sum projection in product mode and on non-sums", "[transforms]") {
  const auto set = direct_sum_set({finite_list({scalar(1, 2.0), identity(1)}),
                                   finite_list({scalar(1, 0.5), scalar(1, 3.0), identity(1)})},
                                  DirectSumMode::Product);
  const Vector x{Complex(1.0), Complex(1.0)};
  const auto w = residual(set, x, EnumerationBudget(6));
  CHECK(w.witness->op_index == 6);
  const auto p = project_direct_sum_witness(set, x, *w.witness);
  CHECK(p.components[0].op_index == 2);
  CHECK(p.components[1].op_index == 3);
  CHECK(kind_of([&] { project_direct_sum_witness(powers(identity(2)), x, *w.witness); }) ==
        ErrorKind::NotDecomposable);
}

TEST_CASE("unimodular transfer on rotations", "[transforms]") {
  const auto gam = powers(scalar(1, std::polar(1.0, kPi / 4)));
  const auto rep = unimodular_transfer_check(gam, Sequence::phase(1.0), Vector::basis(1, 1), 0.05,
                                             EnumerationBudget(200));
  CHECK(rep.validated_pairs == 9);
  REQUIRE(rep.forward);
  CHECK(rep.forward->op_index == 8);
  CHECK(rep.backward);
  CHECK(rep.agree);
}

TEST_CASE("unimodular transfer validates product closure and multiplicativity", "[transforms]") {
  const auto fin = finite_list({scalar(1, 2.0), scalar(1, 3.0)});
  CHECK(kind_of([&] {
          unimodular_transfer_check(fin, Sequence::phase(1.0), Vector::basis(1, 1), 0.1, EnumerationBudget(2));
        }) == ErrorKind::NotProductClosed);
  const auto gam = powers(scalar(1, std::polar(1.0, 0.3)));
  CHECK(kind_of([&] {
          unimodular_transfer_check(gam, Sequence::list({1.0, Complex(0, 1), 1.0, 1.0, 1.0, 1.0}),
                                    Vector::basis(1, 1), 0.1, EnumerationBudget(3));
        }) == ErrorKind::NotMultiplicative);
}
