#pragma once

// Ambient space C^n: vectors, norms, balls, seeded sampling and lattices.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "opdyn/error.hpp"

namespace opdyn {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Immutable complex coordinate vector. All entries are finite and dim >= 1.
class Vector {
 public:
  explicit Vector(CVector coords) : coords_(std::move(coords)) {
    require(coords_.size() >= 1, ErrorKind::InvalidArgument, "vector dimension must be >= 1");
    for (Eigen::Index i = 0; i < coords_.size(); ++i) {
      require(std::isfinite(coords_[i].real()) && std::isfinite(coords_[i].imag()),
              ErrorKind::InvalidArgument, "vector entries must be finite");
    }
  }

  Vector(std::initializer_list<Complex> values) : Vector(from_list(values)) {}

  static Vector zero(std::size_t dim) { return Vector(CVector::Zero(static_cast<Eigen::Index>(dim))); }

  /// Standard basis vector e_i, 1-based like the sequence-space literature.
  static Vector basis(std::size_t dim, std::size_t i) {
    require(i >= 1 && i <= dim, ErrorKind::InvalidArgument, "basis index out of range");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(i - 1)] = 1.0;
    return Vector(std::move(v));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(coords_.size()); }
  const CVector& coords() const noexcept { return coords_; }
  Complex operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }

  bool is_zero() const { return coords_.isZero(0.0); }

  friend Vector operator+(const Vector& a, const Vector& b) {
    check_same(a, b);
    return Vector(a.coords_ + b.coords_);
  }
  friend Vector operator-(const Vector& a, const Vector& b) {
    check_same(a, b);
    return Vector(a.coords_ - b.coords_);
  }
  friend Vector operator*(Complex s, const Vector& a) { return Vector(s * a.coords_); }

  friend bool operator==(const Vector& a, const Vector& b) {
    return a.dim() == b.dim() && a.coords_ == b.coords_;
  }

 private:
  static CVector from_list(std::initializer_list<Complex> values) {
    CVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const auto& c : values) v[i++] = c;
    return v;
  }
  static void check_same(const Vector& a, const Vector& b) {
    require(a.dim() == b.dim(), ErrorKind::DimensionMismatch, "vector dimensions differ");
  }

  CVector coords_;
};

enum class NormKind { L2, LInf };

inline double norm(const CVector& v, NormKind k = NormKind::L2) {
  if (v.size() == 0) return 0.0;
  if (k == NormKind::L2) return v.norm();
  return v.cwiseAbs().maxCoeff();
}

inline double norm(const Vector& v, NormKind k = NormKind::L2) { return norm(v.coords(), k); }

inline double distance(const Vector& a, const Vector& b, NormKind k = NormKind::L2) {
  require(a.dim() == b.dim(), ErrorKind::DimensionMismatch, "vector dimensions differ");
  return norm(CVector(a.coords() - b.coords()), k);
}

struct Ball {
  Ball(Vector c, double r) : center(std::move(c)), radius(r) {
    require(std::isfinite(r) && r >= 0.0, ErrorKind::InvalidArgument, "ball radius must be finite and >= 0");
  }

  std::size_t dim() const noexcept { return center.dim(); }
  bool contains(const Vector& v, double slack = 0.0) const { return distance(v, center) <= radius + slack; }

  Vector center;
  double radius;
};

/// Seeded generator. Identical (seed, stream) pairs replay identical sequences,
/// so parallel consumers partition work by stream index.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::uint64_t s = splitmix(seed ^ splitmix(stream + 0x9e3779b97f4a7c15ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  /// Index in [lo, hi].
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }

  /// Standard complex Gaussian vector (real and imaginary parts i.i.d. N(0,1)).
  CVector complex_gaussian(std::size_t dim) {
    CVector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double re = normal();
      const double im = normal();
      v[i] = Complex(re, im);
    }
    return v;
  }

  CMatrix complex_gaussian(std::size_t rows, std::size_t cols) {
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double re = normal();
        const double im = normal();
        m(i, j) = Complex(re, im);
      }
    return m;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Uniform sample from the closed Euclidean ball. Complex dimension n is real
/// dimension 2n, hence the u^(1/2n) radial law.
inline Vector sample_in_ball(const Ball& b, Rng& rng) {
  if (b.radius == 0.0) return b.center;
  const std::size_t n = b.dim();
  CVector dir = rng.complex_gaussian(n);
  double len = dir.norm();
  while (len == 0.0) {
    dir = rng.complex_gaussian(n);
    len = dir.norm();
  }
  const double rho = b.radius * std::pow(rng.uniform(), 1.0 / (2.0 * static_cast<double>(n)));
  CVector w = b.center.coords() + (rho / len) * dir;
  // Guard the closed-ball contract against the last ulp.
  const double d = (w - b.center.coords()).norm();
  if (d > b.radius) w = b.center.coords() + (b.radius / d) * (w - b.center.coords());
  return Vector(std::move(w));
}

struct GridLimits {
  std::size_t max_dim_times_per_axis = 64;
  std::size_t max_points = 1'000'000;
};

/// Lattice over the cube inscribed in the ball: every real and imaginary
/// coordinate offset takes per_axis equispaced values in [-h, h] with
/// h = r / sqrt(2 dim), so all lattice points lie in the closed ball. The first
/// coordinate varies slowest. The centre is always present (prepended when
/// per_axis is even).
inline std::vector<Vector> grid_points(const Ball& b, std::size_t per_axis, const GridLimits& limits = {}) {
  require(per_axis >= 1, ErrorKind::InvalidArgument, "per_axis must be >= 1");
  const std::size_t n = b.dim();
  if (n * per_axis > limits.max_dim_times_per_axis)
    fail(ErrorKind::GridTooLarge, "dim * per_axis = " + std::to_string(n * per_axis) + " exceeds cap " +
                                      std::to_string(limits.max_dim_times_per_axis));
  if (per_axis == 1) return {b.center};

  const std::size_t real_dims = 2 * n;
  double total = 1.0;
  for (std::size_t i = 0; i < real_dims; ++i) total *= static_cast<double>(per_axis);
  if (total > static_cast<double>(limits.max_points))
    fail(ErrorKind::GridTooLarge, "grid would have " + std::to_string(total) + " points");

  const double half = b.radius / std::sqrt(static_cast<double>(real_dims));
  std::vector<double> ticks(per_axis);
  for (std::size_t j = 0; j < per_axis; ++j)
    ticks[j] = -half + 2.0 * half * static_cast<double>(j) / static_cast<double>(per_axis - 1);

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(total) + 1);
  if (per_axis % 2 == 0) out.push_back(b.center);

  std::vector<std::size_t> digit(real_dims, 0);
  const std::size_t count = static_cast<std::size_t>(total);
  for (std::size_t idx = 0; idx < count; ++idx) {
    CVector off(static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c)
      off[static_cast<Eigen::Index>(c)] = Complex(ticks[digit[2 * c]], ticks[digit[2 * c + 1]]);
    if (off.norm() <= b.radius * (1.0 + 1e-12)) out.emplace_back(CVector(b.center.coords() + off));
    for (std::size_t d = real_dims; d-- > 0;) {
      if (++digit[d] < per_axis) break;
      digit[d] = 0;
    }
  }
  return out;
}

}  // namespace opdyn
