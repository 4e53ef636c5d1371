#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "opdyn/core_space.hpp"

namespace opdyn {

/// Norm estimate with an a-posteriori bound on |estimate - true value|.
struct NormEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  std::size_t iterations = 0;

  double upper() const { return value + error_bound; }
};

struct PowerIterationOptions {
  std::size_t max_iterations = 10'000;
  double relative_tolerance = 1e-10;
  std::uint64_t seed = 0x5eed'0f'0e'7a'70ULL;
};

/// Spectral norm of a (possibly rectangular) matrix by power iteration on the
/// Gram matrix M*M. Start vector is drawn from a fixed seed, so the estimate is
/// deterministic. Stops when the Rayleigh residual ||Gv - lambda v|| drops
/// below tol * lambda; Weyl's bound then puts an eigenvalue of G within that
/// residual, which is reported as the error bound (in units of the norm).
inline NormEstimate matrix_two_norm(const CMatrix& m, const PowerIterationOptions& opt = {}) {
  NormEstimate est;
  if (m.size() == 0 || m.isZero(0.0)) return est;

  Rng rng(opt.seed, static_cast<std::uint64_t>(m.cols()));
  CVector v = rng.complex_gaussian(static_cast<std::size_t>(m.cols()));
  v.normalize();

  double lambda = 0.0;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    const CVector mv = m * v;
    const CVector g = m.adjoint() * mv;
    lambda = mv.squaredNorm();
    const double eta = (g - lambda * v).norm();
    const double gn = g.norm();
    if (gn == 0.0) {
      // v landed in the kernel; restart from a fresh direction
      v = rng.complex_gaussian(static_cast<std::size_t>(m.cols()));
      v.normalize();
      continue;
    }
    if (eta <= opt.relative_tolerance * lambda) {
      est.value = std::sqrt(lambda);
      // |sigma^2 - lambda| <= eta  =>  |sigma - sqrt(lambda)| <= eta / sqrt(lambda)
      est.error_bound = eta / est.value;
      est.iterations = it;
      return est;
    }
    v = g / gn;
  }
  fail(ErrorKind::NonConvergence, "power iteration did not converge in " + std::to_string(opt.max_iterations) +
                                      " iterations (last estimate " + std::to_string(std::sqrt(lambda)) + ")");
}

/// Frobenius norm: always an upper bound on the spectral norm.
inline double frobenius_upper_bound(const CMatrix& m) { return m.norm(); }

/// Spectral norm that never throws: power iteration, falling back to the
/// Frobenius bound when iteration stalls.
inline double matrix_two_norm_upper(const CMatrix& m) {
  try {
    return matrix_two_norm(m).upper();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonConvergence) throw;
    return frobenius_upper_bound(m);
  }
}

/// Integer power by repeated squaring.
inline Complex ipow(Complex a, std::uint64_t n) {
  Complex result(1.0, 0.0);
  while (n > 0) {
    if (n & 1U) result *= a;
    a *= a;
    n >>= 1U;
  }
  return result;
}

inline CMatrix matrix_power(CMatrix a, std::uint64_t n) {
  CMatrix result = CMatrix::Identity(a.rows(), a.cols());
  while (n > 0) {
    if (n & 1U) result = result * a;
    n >>= 1U;
    if (n > 0) a = a * a;
  }
  return result;
}

}  // namespace opdyn
