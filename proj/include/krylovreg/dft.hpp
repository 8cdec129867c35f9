#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "types.hpp"

namespace krylovreg {

enum class DftDirection { forward, inverse };

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 transform: x_k <- sum_j x_j exp(sign*2*pi*i*jk/n),
/// no scaling. n must be a power of two.
inline void fft_pow2(ComplexVector& x, int sign) {
  const std::size_t n = x.size();
  if (n <= 1) return;
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    const Complex wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex u = x[i + k];
        const Complex v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Arbitrary-length transform via Bluestein's chirp-z reduction to a
/// power-of-two cyclic convolution. Same kernel convention as fft_pow2.
inline ComplexVector fft_bluestein(const ComplexVector& x, int sign) {
  const std::size_t n = x.size();
  // chirp c_j = exp(sign*pi*i*j^2/n); j^2 is reduced mod 2n to keep the
  // angle argument small.
  ComplexVector chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t jsq = (static_cast<std::uint64_t>(j) * j) % (2 * n);
    const double ang = sign * kPi * static_cast<double>(jsq) / static_cast<double>(n);
    chirp[j] = Complex(std::cos(ang), std::sin(ang));
  }
  std::size_t L = 1;
  while (L < 2 * n - 1) L <<= 1;
  ComplexVector a(L, Complex(0.0)), b(L, Complex(0.0));
  for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * chirp[j];
  for (std::size_t j = 0; j < n; ++j) {
    b[j] = std::conj(chirp[j]);
    if (j != 0) b[L - j] = std::conj(chirp[j]);
  }
  fft_pow2(a, -1);
  fft_pow2(b, -1);
  for (std::size_t j = 0; j < L; ++j) a[j] *= b[j];
  fft_pow2(a, +1);
  const double scale = 1.0 / static_cast<double>(L);
  ComplexVector out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
  return out;
}

inline ComplexVector fft_any(const ComplexVector& x, int sign) {
  if (is_power_of_two(x.size())) {
    ComplexVector y = x;
    fft_pow2(y, sign);
    return y;
  }
  return fft_bluestein(x, sign);
}

}  // namespace detail

/// Unitary discrete Fourier transform. With W the unitary DFT matrix
/// (entries exp(-2*pi*i*jk/m)/sqrt(m)), the forward direction applies W*
/// and the inverse applies W. Circulants diagonalize as C = W D W*.
inline ComplexVector unitary_dft(const ComplexVector& v, DftDirection dir) {
  if (v.empty()) throw std::invalid_argument("unitary_dft: empty input");
  const int sign = (dir == DftDirection::forward) ? +1 : -1;
  ComplexVector out = detail::fft_any(v, sign);
  const double scale = 1.0 / std::sqrt(static_cast<double>(v.size()));
  for (Complex& z : out) z *= scale;
  return out;
}

}  // namespace krylovreg
