#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "arnoldi.hpp"
#include "linalg.hpp"
#include "operator.hpp"
#include "solvers.hpp"
#include "types.hpp"

namespace krylovreg {

namespace detail {

// shared reduction of the projected problem min ||H z - beta e_1||
struct ReducedSvd {
  SvdResult svd;
  ComplexVector g;        // U^* (beta e_1)
  double beta = 0.0;
  double floor2 = 0.0;    // squared residual floor ||(I - UU^*) beta e_1||^2
};

inline ReducedSvd reduce_projected_problem(const ArnoldiDecomposition& decomp) {
  if (decomp.steps == 0) throw std::invalid_argument("regularization: empty decomposition");
  ReducedSvd r;
  r.beta = decomp.bnorm;
  const ComplexMatrix& h = decomp.hessenberg;
  r.svd = svd_small(h);
  r.g.resize(r.svd.sigma.size());
  double captured = 0.0;
  for (std::size_t i = 0; i < r.g.size(); ++i) {
    r.g[i] = r.beta * std::conj(r.svd.u(0, i));
    captured += std::norm(r.g[i]);
  }
  r.floor2 = std::max(r.beta * r.beta - captured, 0.0);
  return r;
}

// phi(mu)^2 = ||H z_mu - beta e_1||^2 along the Tikhonov path
inline double tikhonov_discrepancy2(const ReducedSvd& r, double mu) {
  double s = r.floor2;
  for (std::size_t i = 0; i < r.g.size(); ++i) {
    const double sig2 = r.svd.sigma[i] * r.svd.sigma[i];
    const double f = mu / (sig2 + mu);
    s += f * f * std::norm(r.g[i]);
  }
  return s;
}

inline double tikhonov_discrepancy2_derivative(const ReducedSvd& r, double mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.g.size(); ++i) {
    const double sig2 = r.svd.sigma[i] * r.svd.sigma[i];
    const double denom = sig2 + mu;
    s += 2.0 * mu * sig2 / (denom * denom * denom) * std::norm(r.g[i]);
  }
  return s;
}

inline ComplexVector tikhonov_coefficients(const ReducedSvd& r, double mu) {
  ComplexVector z(r.svd.w.rows(), Complex(0.0));
  for (std::size_t i = 0; i < r.g.size(); ++i) {
    const double sig = r.svd.sigma[i];
    if (sig == 0.0 && mu == 0.0) continue;
    const Complex coeff = r.g[i] * sig / (sig * sig + mu);
    axpy(coeff, r.svd.w.column(i), z);
  }
  return z;
}

inline ComplexVector lift_solution(const ArnoldiDecomposition& decomp, const LinearOperator& m_op,
                                   const ComplexVector& z) {
  ComplexVector y(decomp.dim(), Complex(0.0));
  for (std::size_t j = 0; j < z.size() && j < decomp.solution_basis.cols(); ++j)
    axpy(z[j], decomp.solution_basis.column(j), y);
  return m_op.apply(y);
}

}  // namespace detail

struct TikhonovSolution {
  ComplexVector x;        // M V_k z_mu
  ComplexVector z;        // reduced-space coefficients
  double mu = 0.0;
  double discrepancy = 0.0;  // projected residual ||H z - beta e_1||
  bool converged = false;    // discrepancy equation solved to 1e-8 relative
};

/// Tikhonov regularization of the projected problem on a decomposition of
/// the (preconditioned) operator: z_mu minimizes ||H z - beta e_1||^2 +
/// mu ||z||^2, with mu chosen so the projected discrepancy equals
/// tau*delta. The discrepancy is monotonically increasing in mu, so a
/// safeguarded Newton iteration with a bisection fallback converges; when
/// even mu -> 0 leaves the discrepancy above tau*delta the subspace is too
/// small and the limit solution is returned unconverged.
inline TikhonovSolution arnoldi_tikhonov(const ArnoldiDecomposition& decomp,
                                         const LinearOperator& m_op, const DiscrepancyRule& rule) {
  if (rule.delta <= 0.0) throw std::invalid_argument("arnoldi_tikhonov: delta must be positive");
  const detail::ReducedSvd r = detail::reduce_projected_problem(decomp);
  const double target = rule.tau * rule.delta;
  const double sigma1 = r.svd.sigma.empty() ? 0.0 : r.svd.sigma.front();

  TikhonovSolution out;

  // phi(0+): components on exactly-zero singular values stay in the residual
  double phi0_sq = r.floor2;
  const double rank_tol = 1e-14 * sigma1;
  for (std::size_t i = 0; i < r.g.size(); ++i)
    if (r.svd.sigma[i] <= rank_tol) phi0_sq += std::norm(r.g[i]);

  if (target * target <= phi0_sq || sigma1 == 0.0) {
    // subspace too small: return the mu -> 0+ limit
    ComplexVector z(r.svd.w.rows(), Complex(0.0));
    for (std::size_t i = 0; i < r.g.size(); ++i) {
      if (r.svd.sigma[i] <= rank_tol) continue;
      axpy(r.g[i] / r.svd.sigma[i], r.svd.w.column(i), z);
    }
    out.z = std::move(z);
    out.mu = 0.0;
    out.discrepancy = std::sqrt(phi0_sq);
    out.converged = false;
    out.x = detail::lift_solution(decomp, m_op, out.z);
    return out;
  }

  double lo = 1e-16 * sigma1 * sigma1;
  double hi = 1e+16 * sigma1 * sigma1;
  const double target2 = target * target;
  // widen the default bracket when the singular values decay past it
  for (int e = 0; e < 32 && detail::tikhonov_discrepancy2(r, lo) >= target2; ++e) lo *= 1e-8;
  for (int e = 0; e < 8 && detail::tikhonov_discrepancy2(r, hi) <= target2; ++e) hi *= 1e+8;
  double mu = std::sqrt(lo * hi);
  const bool bracket_ok = detail::tikhonov_discrepancy2(r, lo) < target2 &&
                          detail::tikhonov_discrepancy2(r, hi) > target2;

  if (!bracket_ok) {
    // target is above everything reachable (tau*delta >= ||b|| in effect)
    mu = detail::tikhonov_discrepancy2(r, hi) <= target2 ? hi : lo;
  } else {
    int newton_steps = 0;
    for (int it = 0; it < 200; ++it) {
      const double f = detail::tikhonov_discrepancy2(r, mu) - target2;
      if (std::abs(std::sqrt(f + target2) - target) <= 1e-10 * target) break;
      if (f > 0.0)
        hi = mu;
      else
        lo = mu;
      double next;
      if (newton_steps < 60) {
        const double df = detail::tikhonov_discrepancy2_derivative(r, mu);
        next = mu - f / df;
        ++newton_steps;
      } else {
        next = std::sqrt(lo * hi);
      }
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = std::sqrt(lo * hi);
      if (next == mu) break;
      mu = next;
    }
  }

  out.mu = mu;
  out.z = detail::tikhonov_coefficients(r, mu);
  out.discrepancy = std::sqrt(detail::tikhonov_discrepancy2(r, mu));
  out.converged = std::abs(out.discrepancy - target) <= 1e-8 * target;
  out.x = detail::lift_solution(decomp, m_op, out.z);
  return out;
}

struct TsvdSolution {
  ComplexVector x;        // M V_k z^{(j)}
  ComplexVector z;
  std::size_t truncation = 0;  // j
  double discrepancy = 0.0;    // projected residual at j
  bool attained = false;       // discrepancy <= tau*delta reached within rank
};

/// Truncated-SVD regularization of the projected problem: the truncation
/// index is the smallest j whose minimum-norm rank-j solution satisfies
/// the discrepancy principle. Singular values below 1e-14 sigma_1 are not
/// truncation candidates; if no candidate satisfies the principle the
/// largest one is returned, flagged, which signals that k must grow.
inline TsvdSolution arnoldi_tsvd(const ArnoldiDecomposition& decomp, const LinearOperator& m_op,
                                 const DiscrepancyRule& rule) {
  if (rule.delta <= 0.0) throw std::invalid_argument("arnoldi_tsvd: delta must be positive");
  const detail::ReducedSvd r = detail::reduce_projected_problem(decomp);
  const double target = rule.tau * rule.delta;
  const double sigma1 = r.svd.sigma.empty() ? 0.0 : r.svd.sigma.front();
  const double rank_tol = 1e-14 * sigma1;

  std::size_t rank = 0;
  while (rank < r.svd.sigma.size() && r.svd.sigma[rank] > rank_tol) ++rank;
  if (rank == 0) throw std::invalid_argument("arnoldi_tsvd: projected matrix is zero");

  TsvdSolution out;
  double disc2 = r.beta * r.beta;
  std::size_t j = 0;
  for (std::size_t i = 0; i < rank; ++i) {
    disc2 = std::max(disc2 - std::norm(r.g[i]), 0.0);
    j = i + 1;
    if (std::sqrt(disc2) <= target) {
      out.attained = true;
      break;
    }
  }
  out.truncation = j;
  out.discrepancy = std::sqrt(disc2);

  ComplexVector z(r.svd.w.rows(), Complex(0.0));
  for (std::size_t i = 0; i < j; ++i) axpy(r.g[i] / r.svd.sigma[i], r.svd.w.column(i), z);
  out.z = std::move(z);
  out.x = detail::lift_solution(decomp, m_op, out.z);
  return out;
}

}  // namespace krylovreg
