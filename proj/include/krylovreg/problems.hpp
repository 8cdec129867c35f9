#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "operator.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace krylovreg {

/// A right-hand side with a reproducible additive noise realization:
/// b = b_exact + e, A x_exact = b_exact, delta = ||e||.
struct NoisyProblem {
  LinearOperator a;
  ComplexVector b;
  ComplexVector b_exact;
  ComplexVector x_exact;
  ComplexVector e;
  double delta = 0.0;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
};

struct NoiseRealization {
  ComplexVector b;
  ComplexVector e;
  double delta = 0.0;
};

/// Gaussian white noise scaled to an exact relative level:
/// e = level * ||b_exact|| * w/||w|| with w drawn from the seeded stream,
/// so the noise-norm bound delta = ||e|| is tight by construction.
inline NoiseRealization add_noise(const ComplexVector& b_exact, double level,
                                  std::uint64_t seed) {
  if (level < 0.0) throw std::invalid_argument("add_noise: negative noise level");
  NoiseRealization out;
  out.e.assign(b_exact.size(), Complex(0.0));
  if (level > 0.0) {
    GaussianStream g(seed);
    for (Complex& z : out.e) z = g.next();
    const double scale = level * norm(b_exact) / norm(out.e);
    for (Complex& z : out.e) z *= scale;
  }
  out.b = add(b_exact, out.e);
  out.delta = norm(out.e);
  return out;
}

/// Downshift matrix problem with b = e_2 and x_exact = e_1; the Krylov
/// space of (A, b) never meets the solution until breakdown.
inline NoisyProblem downshift_problem(std::size_t m) {
  if (m < 2) throw std::invalid_argument("downshift_problem: need m >= 2");
  ComplexMatrix a(m, m);
  for (std::size_t i = 0; i + 1 < m; ++i) a(i + 1, i) = 1.0;
  NoisyProblem p;
  p.a = dense_operator(std::move(a));
  p.b_exact = unit_vector(m, 1);
  p.b = p.b_exact;
  p.x_exact = unit_vector(m, 0);
  p.e.assign(m, Complex(0.0));
  return p;
}

/// Circulant variant of the downshift problem ((1,m) entry set to one);
/// the matrix is unitary, so the normal equations are trivial.
inline NoisyProblem circulant_shift_problem(std::size_t m) {
  if (m < 2) throw std::invalid_argument("circulant_shift_problem: need m >= 2");
  ComplexMatrix a(m, m);
  for (std::size_t i = 0; i + 1 < m; ++i) a(i + 1, i) = 1.0;
  a(0, m - 1) = 1.0;
  NoisyProblem p;
  p.a = dense_operator(std::move(a));
  p.b_exact = unit_vector(m, 1);
  p.b = p.b_exact;
  p.x_exact = unit_vector(m, 0);
  p.e.assign(m, Complex(0.0));
  return p;
}

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1]
inline constexpr double kGaussNodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr double kGaussWeights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// (exp(b*c) - exp(a*c))/c, stable for c -> 0
inline double exp_difference_over(double a, double b, double c) {
  const double z = (b - a) * c;
  const double phi1 = std::abs(z) < 1e-8 ? 1.0 + 0.5 * z : std::expm1(z) / z;
  return std::exp(a * c) * (b - a) * phi1;
}

}  // namespace detail

/// Galerkin discretization (orthonormal box functions) of the Fredholm
/// first-kind equation with kernel exp(s cos t), s in [0, pi/2],
/// t in [0, pi]; the solution is sin(t) and the right-hand side is
/// recomputed as A x_exact so the discrete problem is consistent. The
/// singular values decay past machine precision within ~15 indices.
inline NoisyProblem baart_problem(std::size_t m, double noise_level, std::uint64_t seed) {
  if (m < 4 || m % 2 != 0) throw std::invalid_argument("baart_problem: m must be even and >= 4");
  const double pi = detail::kPi;
  const double hs = 0.5 * pi / static_cast<double>(m);
  const double ht = pi / static_cast<double>(m);
  const double weight = 1.0 / std::sqrt(hs * ht);

  ComplexMatrix a(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t0 = static_cast<double>(j) * ht;
    for (std::size_t i = 0; i < m; ++i) {
      const double s0 = static_cast<double>(i) * hs;
      const double s1 = s0 + hs;
      double cell = 0.0;
      for (int q = 0; q < 8; ++q) {
        const double t = t0 + 0.5 * ht * (1.0 + detail::kGaussNodes[q]);
        cell += detail::kGaussWeights[q] * detail::exp_difference_over(s0, s1, std::cos(t));
      }
      a(i, j) = weight * 0.5 * ht * cell;
    }
  }

  NoisyProblem p;
  p.x_exact.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t0 = static_cast<double>(j) * ht;
    p.x_exact[j] = (std::cos(t0) - std::cos(t0 + ht)) / std::sqrt(ht);
  }
  p.b_exact = matvec(a, p.x_exact);
  p.a = dense_operator(std::move(a));
  const NoiseRealization noise = add_noise(p.b_exact, noise_level, seed);
  p.b = noise.b;
  p.e = noise.e;
  p.delta = noise.delta;
  p.noise_level = noise_level;
  p.seed = seed;
  return p;
}

/// Midpoint-rule discretization of the inverse heat equation (Volterra
/// first-kind kernel k(t) = t^{-3/2}/(2 sqrt(pi)) exp(-1/(4t)) on [0,1]).
/// The matrix is lower-triangular Toeplitz and numerically rank-deficient.
inline NoisyProblem heat_problem(std::size_t m, double noise_level, std::uint64_t seed) {
  if (m < 10) throw std::invalid_argument("heat_problem: need m >= 10");
  const double h = 1.0 / static_cast<double>(m);
  const double c = h / (2.0 * std::sqrt(detail::kPi));

  ComplexVector column(m);
  for (std::size_t l = 0; l < m; ++l) {
    const double t = (static_cast<double>(l) + 0.5) * h;
    column[l] = c * std::pow(t, -1.5) * std::exp(-1.0 / (4.0 * t));
  }
  ComplexMatrix a(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = j; i < m; ++i) a(i, j) = column[i - j];

  NoisyProblem p;
  p.x_exact.assign(m, Complex(0.0));
  for (std::size_t i = 1; i <= m / 2; ++i) {
    const double ti = static_cast<double>(i) * 20.0 / static_cast<double>(m);
    double v;
    if (ti < 2.0)
      v = 0.75 * ti * ti / 4.0;
    else if (ti < 3.0)
      v = 0.75 + (ti - 2.0) * (3.0 - ti);
    else
      v = 0.75 * std::exp(-(ti - 3.0) * 2.0);
    p.x_exact[i - 1] = v;
  }
  p.b_exact = matvec(a, p.x_exact);
  p.a = dense_operator(std::move(a));
  const NoiseRealization noise = add_noise(p.b_exact, noise_level, seed);
  p.b = noise.b;
  p.e = noise.e;
  p.delta = noise.delta;
  p.noise_level = noise_level;
  p.seed = seed;
  return p;
}

/// Point-spread function: pixel weights plus the center tap position.
struct Psf {
  std::size_t rows = 0, cols = 0;
  std::size_t center_row = 0, center_col = 0;
  std::vector<double> weights;  // row-major

  double at(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }
};

inline Psf delta_psf() {
  Psf p;
  p.rows = p.cols = 1;
  p.weights = {1.0};
  return p;
}

/// Motion along two orthogonal one-sided arms (right and down from the
/// anchor pixel), normalized to unit weight; strongly nonsymmetric.
inline Psf motion_psf(std::size_t size) {
  if (size < 1) throw std::invalid_argument("motion_psf: empty size");
  Psf p;
  p.rows = p.cols = size;
  p.center_row = p.center_col = 0;
  p.weights.assign(size * size, 0.0);
  for (std::size_t q = 0; q < size; ++q) p.weights[q] = 1.0;
  for (std::size_t r = 1; r < size; ++r) p.weights[r * size] = 1.0;
  const double total = static_cast<double>(2 * size - 1);
  for (double& w : p.weights) w /= total;
  return p;
}

inline Psf gaussian_psf(std::size_t size, double sigma) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("gaussian_psf: size must be odd and positive");
  Psf p;
  p.rows = p.cols = size;
  p.center_row = p.center_col = size / 2;
  p.weights.assign(size * size, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) {
      const double dr = static_cast<double>(r) - static_cast<double>(size / 2);
      const double dc = static_cast<double>(c) - static_cast<double>(size / 2);
      const double w = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      p.weights[r * size + c] = w;
      total += w;
    }
  for (double& w : p.weights) w /= total;
  return p;
}

enum class Boundary { reflective };

namespace detail {

// half-sample reflection: ..., x1, x0 | x0, x1, ..., x_{n-1} | x_{n-1}, ...
inline std::size_t reflect_index(long idx, std::size_t n) {
  const long ln = static_cast<long>(n);
  while (idx < 0 || idx >= ln) {
    if (idx < 0) idx = -idx - 1;
    if (idx >= ln) idx = 2 * ln - 1 - idx;
  }
  return static_cast<std::size_t>(idx);
}

}  // namespace detail

/// Deterministic geometric test image (squares and a disk) with values
/// in [0, 1], row r / column c addressed as image[c*n + r].
inline std::vector<double> geometric_test_image(std::size_t n) {
  std::vector<double> img(n * n, 0.1);
  const double dn = static_cast<double>(n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) {
      const double x = static_cast<double>(r) / dn;
      const double y = static_cast<double>(c) / dn;
      if (x >= 0.10 && x < 0.40 && y >= 0.12 && y < 0.42) img[c * n + r] = 1.0;
      if (x >= 0.55 && x < 0.72 && y >= 0.60 && y < 0.88) img[c * n + r] = 0.6;
      const double dx = x - 0.70, dy = y - 0.30;
      if (dx * dx + dy * dy < 0.18 * 0.18) img[c * n + r] = 0.85;
    }
  return img;
}

/// 2D deblurring problem: A acts on column-stacked n x n images by
/// correlation with the point-spread function under reflective boundary
/// conditions, assembled densely row by row.
inline NoisyProblem blur2d_problem(std::size_t n, const Psf& psf, Boundary boundary,
                                   double noise_level, std::uint64_t seed) {
  if (n < 2 || n > 64) throw std::invalid_argument("blur2d_problem: need 2 <= n <= 64");
  if (psf.rows > n || psf.cols > n)
    throw std::invalid_argument("blur2d_problem: point-spread function larger than the image");
  if (psf.weights.empty()) throw std::invalid_argument("blur2d_problem: empty point-spread function");
  (void)boundary;  // reflective is the only supported choice

  const std::size_t m = n * n;
  ComplexMatrix a(m, m);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t row_out = c * n + r;
      for (std::size_t p = 0; p < psf.rows; ++p) {
        for (std::size_t q = 0; q < psf.cols; ++q) {
          const double w = psf.at(p, q);
          if (w == 0.0) continue;
          const std::size_t sr = detail::reflect_index(
              static_cast<long>(r) + static_cast<long>(p) - static_cast<long>(psf.center_row), n);
          const std::size_t sc = detail::reflect_index(
              static_cast<long>(c) + static_cast<long>(q) - static_cast<long>(psf.center_col), n);
          a(row_out, sc * n + sr) += w;
        }
      }
    }
  }

  NoisyProblem p;
  const std::vector<double> img = geometric_test_image(n);
  p.x_exact.resize(m);
  for (std::size_t i = 0; i < m; ++i) p.x_exact[i] = img[i];
  p.b_exact = matvec(a, p.x_exact);
  p.a = dense_operator(std::move(a));
  const NoiseRealization noise = add_noise(p.b_exact, noise_level, seed);
  p.b = noise.b;
  p.e = noise.e;
  p.delta = noise.delta;
  p.noise_level = noise_level;
  p.seed = seed;
  return p;
}

}  // namespace krylovreg
