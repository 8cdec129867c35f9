// Test-only reference implementations, kept independent of the library
// code paths they are used to check.
#pragma once

#include <krylovreg/rng.hpp>
#include <krylovreg/types.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

using krylovreg::Complex;
using krylovreg::ComplexMatrix;
using krylovreg::ComplexVector;

/// Quadratic-cost DFT with kernel exp(sign*2*pi*i*jk/m)/sqrt(m).
inline ComplexVector naive_unitary_dft(const ComplexVector& v, int sign) {
  const std::size_t m = v.size();
  ComplexVector out(m, Complex(0.0));
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (std::size_t k = 0; k < m; ++k) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double ang = sign * two_pi * static_cast<double>(j * k % m) / static_cast<double>(m);
      s += v[j] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = s / std::sqrt(static_cast<double>(m));
  }
  return out;
}

inline ComplexVector random_vector(std::size_t m, std::uint64_t seed, bool complex_entries = true) {
  krylovreg::GaussianStream g(seed);
  ComplexVector v(m);
  for (auto& z : v)
    z = complex_entries ? Complex(g.next(), g.next()) : Complex(g.next(), 0.0);
  return v;
}

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                   bool complex_entries = true) {
  krylovreg::GaussianStream g(seed);
  ComplexMatrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i)
      a(i, j) = complex_entries ? Complex(g.next(), g.next()) : Complex(g.next(), 0.0);
  return a;
}

inline ComplexMatrix random_hermitian(std::size_t n, std::uint64_t seed) {
  ComplexMatrix a = random_matrix(n, n, seed);
  ComplexMatrix h(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return h;
}

inline ComplexMatrix random_upper_hessenberg(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  ComplexMatrix a = random_matrix(rows, cols, seed);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = j + 2; i < rows; ++i) a(i, j) = 0.0;
  return a;
}

/// Dense linear solve by Gaussian elimination with partial pivoting.
inline ComplexVector dense_solve(ComplexMatrix a, ComplexVector b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("dense_solve: bad shapes");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  ComplexVector x(n);
  for (std::size_t k = n; k-- > 0;) {
    Complex s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

/// Normal-equations least squares oracle: solves (H*H) y = H* (beta e_1).
inline ComplexVector normal_equations_lstsq(const ComplexMatrix& h, double beta) {
  const ComplexMatrix hh = krylovreg::matmul(krylovreg::adjoint(h), h);
  ComplexVector rhs(h.rows(), Complex(0.0));
  rhs[0] = beta;
  return dense_solve(hh, krylovreg::adjoint_matvec(h, rhs));
}

/// Dense circulant built by index arithmetic from its first column.
inline ComplexMatrix dense_circulant(const ComplexVector& first_column) {
  const std::size_t m = first_column.size();
  ComplexMatrix c(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) c(i, j) = first_column[(i + m - j) % m];
  return c;
}

inline ComplexMatrix downshift_matrix(std::size_t m) {
  ComplexMatrix a(m, m);
  for (std::size_t i = 0; i + 1 < m; ++i) a(i + 1, i) = 1.0;
  return a;
}

inline double matrix_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return krylovreg::frobenius_norm(krylovreg::subtract(a, b));
}

}  // namespace oracles
