#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace krylovreg {

struct SvdResult {
  ComplexMatrix u;             // left singular vectors, orthonormal columns
  std::vector<double> sigma;   // nonincreasing, nonnegative
  ComplexMatrix w;             // right singular vectors, B = U diag(sigma) W*
};

struct EigResult {
  std::vector<double> lambda;  // real eigenvalues, nonincreasing
  ComplexMatrix u;             // unitary, B = U diag(lambda) U*
};

struct HessenbergLstsqResult {
  ComplexVector y;
  double resnorm = 0.0;
  bool rank_deficient = false;  // minimum-norm solution returned
};

namespace detail {

inline double sign_or_one(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Orthonormal completion for columns whose singular value vanished.
inline void complete_zero_columns(ComplexMatrix& u, const std::vector<bool>& zero_col) {
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  for (std::size_t j = 0; j < n; ++j) {
    if (!zero_col[j]) continue;
    ComplexVector best;
    double best_norm = -1.0;
    for (std::size_t trial = 0; trial < m; ++trial) {
      ComplexVector cand = unit_vector(m, trial);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
          if (i == j || zero_col[i]) continue;
          Complex h = 0.0;
          const Complex* ui = u.col(i);
          for (std::size_t r = 0; r < m; ++r) h += std::conj(ui[r]) * cand[r];
          for (std::size_t r = 0; r < m; ++r) cand[r] -= h * ui[r];
        }
        // also against already-completed zero columns before j
        for (std::size_t i = 0; i < j; ++i) {
          if (!zero_col[i]) continue;
          Complex h = 0.0;
          const Complex* ui = u.col(i);
          for (std::size_t r = 0; r < m; ++r) h += std::conj(ui[r]) * cand[r];
          for (std::size_t r = 0; r < m; ++r) cand[r] -= h * ui[r];
        }
      }
      const double nn = norm(cand);
      if (nn > best_norm) {
        best_norm = nn;
        best = cand;
      }
      if (nn > 0.5) break;
    }
    const double nn = norm(best);
    for (Complex& z : best) z /= nn;
    u.set_column(j, best);
  }
}

inline SvdResult jacobi_svd_tall(const ComplexMatrix& B) {
  const std::size_t m = B.rows();
  const std::size_t n = B.cols();
  ComplexMatrix g = B;
  ComplexMatrix w = ComplexMatrix::identity(n);
  const double conv_tol = 1e-15 * std::sqrt(static_cast<double>(m) + 1.0);
  const int max_sweeps = 30;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        Complex* gp = g.col(p);
        Complex* gq = g.col(q);
        double app = 0.0, aqq = 0.0;
        Complex apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += std::norm(gp[i]);
          aqq += std::norm(gq[i]);
          apq += std::conj(gp[i]) * gq[i];
        }
        const double habs = std::abs(apq);
        if (habs <= conv_tol * std::sqrt(app * aqq) || habs == 0.0) continue;
        rotated = true;
        const Complex phase = apq / habs;       // e^{i alpha}
        const double zeta = (aqq - app) / (2.0 * habs);
        // small-angle root of t^2 - 2*zeta*t - 1 = 0
        const double t = sign_or_one(zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        const Complex cphase = std::conj(phase);
        for (std::size_t i = 0; i < m; ++i) {
          const Complex xp = gp[i];
          const Complex xq = cphase * gq[i];
          gp[i] = cs * xp - sn * xq;
          gq[i] = sn * xp + cs * xq;
        }
        Complex* wp = w.col(p);
        Complex* wq = w.col(q);
        for (std::size_t i = 0; i < n; ++i) {
          const Complex xp = wp[i];
          const Complex xq = cphase * wq[i];
          wp[i] = cs * xp - sn * xq;
          wq[i] = sn * xp + cs * xq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm(g.column(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SvdResult out;
  out.u = ComplexMatrix(m, n);
  out.w = ComplexMatrix(n, n);
  out.sigma.resize(n);
  std::vector<bool> zero_col(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sigma[src];
    out.w.set_column(j, w.column(src));
    if (sigma[src] <= 1e-300) {
      zero_col[j] = true;
      continue;
    }
    ComplexVector uj = g.column(src);
    for (Complex& z : uj) z /= sigma[src];
    out.u.set_column(j, uj);
  }
  complete_zero_columns(out.u, zero_col);
  return out;
}

}  // namespace detail

/// Singular value decomposition of a small dense matrix by one-sided Jacobi
/// rotations. Returns B = U diag(sigma) W* with orthonormal U (rows x
/// min(rows,cols)) and unitary W when rows >= cols; the wide case is handled
/// by transposition.
inline SvdResult svd_small(const ComplexMatrix& B) {
  if (B.rows() == 0 || B.cols() == 0) throw std::invalid_argument("svd_small: empty matrix");
  if (B.rows() >= B.cols()) return detail::jacobi_svd_tall(B);
  SvdResult t = detail::jacobi_svd_tall(adjoint(B));
  SvdResult out;
  out.u = std::move(t.w);
  out.w = std::move(t.u);
  out.sigma = std::move(t.sigma);
  return out;
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in nonincreasing order. Rejects inputs that are
/// not Hermitian to within 1e-12 relative, which signals a caller bug.
inline EigResult hermitian_eig(const ComplexMatrix& B) {
  if (B.rows() != B.cols()) throw std::invalid_argument("hermitian_eig: matrix not square");
  const std::size_t n = B.rows();
  const double bnorm = frobenius_norm(B);
  {
    double dev = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) dev += std::norm(B(i, j) - std::conj(B(j, i)));
    if (std::sqrt(dev) > 1e-12 * std::max(bnorm, 1e-300))
      throw std::invalid_argument("hermitian_eig: input is not Hermitian");
  }

  // exact symmetrization so diagonal entries are real
  ComplexMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) a(i, j) = 0.5 * (B(i, j) + std::conj(B(j, i)));
  ComplexMatrix u = ComplexMatrix::identity(n);

  const double stop_tol = 1e-14 * std::max(bnorm, 1e-300);
  const int max_sweeps = 30;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        if (i != j) off += std::norm(a(i, j));
    if (std::sqrt(off) <= stop_tol) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double habs = std::abs(apq);
        if (habs <= 1e-18 * std::max(bnorm, 1e-300)) continue;
        const Complex phase = apq / habs;  // e^{i phi}
        const double alpha = a(p, p).real();
        const double delta = a(q, q).real();
        const double tau = (delta - alpha) / (2.0 * habs);
        // small-angle root of t^2 + 2*tau*t - 1 = 0
        const double t = detail::sign_or_one(tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        // G = [[c, s],[-s e^{-i phi}, c e^{-i phi}]]; apply A <- G* A G
        const Complex cphase = std::conj(phase);
        for (std::size_t i = 0; i < n; ++i) {  // columns p,q
          const Complex xp = a(i, p);
          const Complex xq = cphase * a(i, q);
          a(i, p) = cs * xp - sn * xq;
          a(i, q) = sn * xp + cs * xq;
        }
        for (std::size_t i = 0; i < n; ++i) {  // rows p,q
          const Complex xp = a(p, i);
          const Complex xq = phase * a(q, i);
          a(p, i) = cs * xp - sn * xq;
          a(q, i) = sn * xp + cs * xq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = Complex(a(p, p).real(), 0.0);
        a(q, q) = Complex(a(q, q).real(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const Complex xp = u(i, p);
          const Complex xq = cphase * u(i, q);
          u(i, p) = cs * xp - sn * xq;
          u(i, q) = sn * xp + cs * xq;
        }
      }
    }
  }

  std::vector<double> lambda(n);
  for (std::size_t i = 0; i < n; ++i) lambda[i] = a(i, i).real();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return lambda[x] > lambda[y]; });
  EigResult out;
  out.lambda.resize(n);
  out.u = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.lambda[j] = lambda[order[j]];
    out.u.set_column(j, u.column(order[j]));
  }
  return out;
}

namespace detail {

// Unitary Givens rotation [[c, s],[-conj(s), c]] with real c mapping
// (f, g) to (r, 0).
inline void givens(const Complex& f, const Complex& g, double& c, Complex& s) {
  const double af = std::abs(f);
  const double ag = std::abs(g);
  if (ag == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (af == 0.0) {
    c = 0.0;
    s = std::conj(g) / ag;
    return;
  }
  const double rho = std::hypot(af, ag);
  c = af / rho;
  s = (f / af) * std::conj(g) / rho;
}

}  // namespace detail

/// Least-squares solve of min ||H y - beta e_1|| for a Hessenberg-profile
/// matrix H with `lower_bandwidth` nonzero subdiagonals, via Givens QR in
/// O(bandwidth * cols^2). Exactly rank-deficient systems fall back to the
/// SVD-based minimum-norm solution and are flagged.
inline HessenbergLstsqResult hessenberg_lstsq(const ComplexMatrix& H, double beta,
                                              std::size_t lower_bandwidth = 0) {
  const std::size_t rows = H.rows();
  const std::size_t cols = H.cols();
  if (rows < cols) throw std::invalid_argument("hessenberg_lstsq: need rows >= cols");
  if (beta < 0.0) throw std::invalid_argument("hessenberg_lstsq: beta must be >= 0");
  std::size_t band = lower_bandwidth;
  if (band == 0) band = rows > cols ? rows - cols : 1;

  HessenbergLstsqResult out;
  if (cols == 0) {
    out.resnorm = beta;
    return out;
  }

  ComplexMatrix r = H;
  ComplexVector rhs(rows, Complex(0.0));
  rhs[0] = beta;
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t last = std::min(j + band, rows - 1);
    for (std::size_t i = j + 1; i <= last; ++i) {
      if (r(i, j) == Complex(0.0)) continue;
      double c;
      Complex s;
      detail::givens(r(j, j), r(i, j), c, s);
      for (std::size_t col = j; col < cols; ++col) {
        const Complex top = r(j, col);
        const Complex bot = r(i, col);
        r(j, col) = c * top + s * bot;
        r(i, col) = -std::conj(s) * top + c * bot;
      }
      const Complex top = rhs[j];
      const Complex bot = rhs[i];
      rhs[j] = c * top + s * bot;
      rhs[i] = -std::conj(s) * top + c * bot;
      r(i, j) = 0.0;
    }
  }

  // Only exact rank deficiency (a structurally zero pivot) takes the
  // minimum-norm branch; ill-conditioned but nonsingular reduced systems
  // must be solved as-is.
  double diag_max = 0.0;
  for (std::size_t j = 0; j < cols; ++j) diag_max = std::max(diag_max, std::abs(r(j, j)));
  bool deficient = diag_max == 0.0;
  for (std::size_t j = 0; j < cols && !deficient; ++j)
    if (std::abs(r(j, j)) <= 1e-280 * diag_max) deficient = true;

  if (deficient) {
    const SvdResult svd = svd_small(H);
    ComplexVector e1(rows, Complex(0.0));
    e1[0] = beta;
    const ComplexVector g = adjoint_matvec(svd.u, e1);
    ComplexVector y(cols, Complex(0.0));
    const double sigma_tol = 1e-14 * (svd.sigma.empty() ? 0.0 : svd.sigma.front());
    for (std::size_t i = 0; i < svd.sigma.size(); ++i) {
      if (svd.sigma[i] <= sigma_tol) continue;
      axpy(g[i] / svd.sigma[i], svd.w.column(i), y);
    }
    out.y = std::move(y);
    out.resnorm = norm(subtract(matvec(H, out.y), e1));
    out.rank_deficient = true;
    return out;
  }

  ComplexVector y(cols, Complex(0.0));
  for (std::size_t jj = cols; jj-- > 0;) {
    Complex s = rhs[jj];
    for (std::size_t col = jj + 1; col < cols; ++col) s -= r(jj, col) * y[col];
    y[jj] = s / r(jj, jj);
  }
  double tail = 0.0;
  for (std::size_t i = cols; i < rows; ++i) tail += std::norm(rhs[i]);
  out.y = std::move(y);
  out.resnorm = std::sqrt(tail);
  return out;
}

}  // namespace krylovreg
