#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "dft.hpp"
#include "linalg.hpp"
#include "operator.hpp"
#include "types.hpp"

namespace krylovreg {

struct HermitianSplit {
  ComplexMatrix hermitian;  // (A + A*)/2
  ComplexMatrix skew;       // (A - A*)/2
};

/// Orthogonal decomposition A = A_H + A_S into Hermitian and
/// skew-Hermitian parts; ||A||_F^2 = ||A_H||_F^2 + ||A_S||_F^2.
inline HermitianSplit hermitian_split(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_split: matrix not square");
  const std::size_t n = a.rows();
  HermitianSplit out{ComplexMatrix(n, n), ComplexMatrix(n, n)};
  // symmetric formulas so each part carries its structure exactly
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      out.hermitian(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
      out.skew(i, j) = 0.5 * (a(i, j) - std::conj(a(j, i)));
    }
  return out;
}

enum class SemidefiniteSign { positive, negative };

struct PsdProjection {
  double distance = 0.0;
  ComplexMatrix projection;  // closest Hermitian (semi)definite matrix
};

/// Frobenius distance to the Hermitian positive (or negative)
/// semidefinite cone, with the minimizing projection: the distance is
/// (sum of squared wrong-sign eigenvalues of A_H plus ||A_S||_F^2)^{1/2}
/// and the projection clips those eigenvalues at zero.
inline PsdProjection dist_to_psd(const ComplexMatrix& a, SemidefiniteSign sign) {
  const HermitianSplit split = hermitian_split(a);
  const EigResult eig = hermitian_eig(split.hermitian);
  const std::size_t n = a.rows();

  double wrong = 0.0;
  std::vector<double> clipped(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = eig.lambda[i];
    const bool keep = (sign == SemidefiniteSign::positive) ? lam > 0.0 : lam < 0.0;
    clipped[i] = keep ? lam : 0.0;
    if (!keep) wrong += lam * lam;
  }
  const double skew2 = [&] {
    const double f = frobenius_norm(split.skew);
    return f * f;
  }();

  PsdProjection out;
  out.distance = std::sqrt(wrong + skew2);
  ComplexMatrix ul = eig.u;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) ul(i, j) *= clipped[j];
  out.projection = matmul(ul, adjoint(eig.u));
  return out;
}

struct GeneralizedHermitianResult {
  ComplexMatrix closest;
  double theta = 0.0;   // optimal rotation angle in (-pi, pi]
  double gamma = 0.0;   // optimal real diagonal shift coefficient
  double distance = 0.0;
  bool degenerate = false;  // infinitely many minimizers; theta is a choice
};

namespace detail {

inline Complex trace_of_a_squared(const ComplexMatrix& a) {
  // sum_{i,j} a_ij a_ji without forming A^2
  Complex w1 = 0.0;
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) w1 += a(i, j) * a(j, i);
  return w1;
}

// d(theta, gamma_hat(theta))^2 from the closed form
inline double gh_distance_squared(double fro2, const Complex& w1, const Complex& w2,
                                  std::size_t m, double theta) {
  const Complex rot = std::polar(1.0, -theta);
  const Complex rot_half = std::polar(1.0, -theta / 2.0);
  const double im = (rot_half * w2).imag();
  return 0.5 * fro2 - 0.5 * (rot * w1).real() - im * im / static_cast<double>(m);
}

}  // namespace detail

/// Closest generalized Hermitian matrix (a rotated-plus-shifted Hermitian
/// matrix) in the Frobenius norm. In the nondegenerate case the optimal
/// angle is arg(Trace(A^2) - Trace(A)^2/m) and the minimizer is unique;
/// when m*Trace(A^2) = Trace(A)^2 every angle gives an equally close
/// matrix and theta_override (default 0) selects one from the family.
inline GeneralizedHermitianResult closest_generalized_hermitian(
    const ComplexMatrix& a, std::optional<double> theta_override = {}) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("closest_generalized_hermitian: matrix not square");
  const std::size_t m = a.rows();
  const Complex w1 = detail::trace_of_a_squared(a);
  const Complex w2 = trace(a);
  const double fro = frobenius_norm(a);

  GeneralizedHermitianResult out;
  const Complex crit = w1 - w2 * w2 / static_cast<double>(m);
  out.degenerate = std::abs(static_cast<double>(m) * w1 - w2 * w2) <=
                   1e-12 * static_cast<double>(m) * std::max(fro * fro, 1e-300);
  if (out.degenerate) {
    out.theta = theta_override.value_or(0.0);
  } else {
    out.theta = std::arg(crit);
  }
  const Complex rot_half = std::polar(1.0, -out.theta / 2.0);
  out.gamma = 2.0 / static_cast<double>(m) * (rot_half * w2).imag();

  out.closest = ComplexMatrix(m, m);
  const Complex eit = std::polar(1.0, out.theta);
  const Complex diag_shift = 0.5 * out.gamma * std::polar(1.0, (out.theta + detail::kPi) / 2.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      out.closest(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)) * eit);
      if (i == j) out.closest(i, j) += diag_shift;
    }

  // the closed-form distance, evaluated entrywise through the
  // minimizer; the trace-based reduction cancels catastrophically when A
  // is already (close to) generalized Hermitian
  out.distance = frobenius_norm(subtract(a, out.closest));
  return out;
}

struct GeneralizedPsdResult {
  ComplexMatrix closest;
  double distance = 0.0;
};

/// Closest generalized Hermitian positive semidefinite matrix: rotate by
/// the optimal half-angle, project the Hermitian part onto the positive
/// semidefinite cone, rotate back, and restore the diagonal shift. The
/// degenerate family admits no unique answer and is refused.
inline GeneralizedPsdResult closest_generalized_psd(const ComplexMatrix& a) {
  const GeneralizedHermitianResult gh = closest_generalized_hermitian(a);
  if (gh.degenerate)
    throw std::runtime_error(
        "closest_generalized_psd: degenerate family, the closest matrix is not unique");
  const std::size_t m = a.rows();

  const Complex back = std::polar(1.0, -gh.theta / 2.0);
  ComplexMatrix rotated(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) rotated(i, j) = back * a(i, j);
  const HermitianSplit split = hermitian_split(rotated);
  const EigResult eig = hermitian_eig(split.hermitian);

  ComplexMatrix ul = eig.u;
  for (std::size_t j = 0; j < m; ++j) {
    const double lam = std::max(eig.lambda[j], 0.0);
    for (std::size_t i = 0; i < m; ++i) ul(i, j) *= lam;
  }
  const ComplexMatrix tilde_plus = matmul(ul, adjoint(eig.u));

  GeneralizedPsdResult out;
  out.closest = ComplexMatrix(m, m);
  const Complex fwd = std::polar(1.0, gh.theta / 2.0);
  const Complex diag_shift = 0.5 * gh.gamma * std::polar(1.0, (gh.theta + detail::kPi) / 2.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      out.closest(i, j) = fwd * tilde_plus(i, j);
      if (i == j) out.closest(i, j) += diag_shift;
    }
  out.distance = frobenius_norm(subtract(a, out.closest));
  return out;
}

/// Distances of one matrix to the classes handled by this module; the
/// circulant gap ||C_A - A||_F is an upper bound on the distance to the
/// normal matrices.
struct NearnessReport {
  double frobenius = 0.0;
  double dist_hermitian = 0.0;
  double dist_skew = 0.0;
  double dist_hpsd = 0.0;
  double dist_hnsd = 0.0;
  double dist_g = 0.0;
  double dist_gplus = std::numeric_limits<double>::quiet_NaN();  // NaN when degenerate
  double theta_hat = 0.0;
  double gamma_hat = 0.0;
  bool degenerate_g = false;
  double circulant_gap = 0.0;
};

inline NearnessReport compute_nearness_report(const ComplexMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("compute_nearness_report: matrix not square");
  NearnessReport r;
  r.frobenius = frobenius_norm(a);
  const HermitianSplit split = hermitian_split(a);
  r.dist_hermitian = frobenius_norm(split.skew);
  r.dist_skew = frobenius_norm(split.hermitian);
  r.dist_hpsd = dist_to_psd(a, SemidefiniteSign::positive).distance;
  r.dist_hnsd = dist_to_psd(a, SemidefiniteSign::negative).distance;
  const GeneralizedHermitianResult gh = closest_generalized_hermitian(a);
  r.dist_g = gh.distance;
  r.theta_hat = gh.theta;
  r.gamma_hat = gh.gamma;
  r.degenerate_g = gh.degenerate;
  if (!gh.degenerate) r.dist_gplus = closest_generalized_psd(a).distance;

  const ComplexVector symbol = detail::nearest_circulant_symbol(a);
  // ||C_A - A||_F^2 = ||A||_F^2 - ||d||^2 since C_A is an orthogonal projection
  const double sym2 = [&] {
    double s = 0.0;
    for (const Complex& z : symbol) s += std::norm(z);
    return s;
  }();
  r.circulant_gap = std::sqrt(std::max(r.frobenius * r.frobenius - sym2, 0.0));
  return r;
}

inline ComplexMatrix downshift_matrix(std::size_t m) {
  if (m < 2) throw std::invalid_argument("downshift_matrix: need m >= 2");
  ComplexMatrix a(m, m);
  for (std::size_t i = 0; i + 1 < m; ++i) a(i + 1, i) = 1.0;
  return a;
}

/// Nearness report for the downshift matrix, whose distances have known
/// closed forms (relative distances 1/sqrt(2) to the Hermitian and
/// skew-Hermitian classes, sqrt(3)/2 to the semidefinite ones).
inline NearnessReport downshift_nearness_report(std::size_t m) {
  return compute_nearness_report(downshift_matrix(m));
}

}  // namespace krylovreg
