#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "arnoldi.hpp"
#include "linalg.hpp"
#include "operator.hpp"
#include "types.hpp"

namespace krylovreg {

/// Discrepancy principle: accept the first iterate whose residual norm
/// drops to tau * delta, where delta bounds the data-noise norm.
struct DiscrepancyRule {
  double delta = 0.0;
  double tau = 1.0;
  bool fires(double resnorm) const { return delta > 0.0 && resnorm <= tau * delta; }
};

enum class StopReason { discrepancy, breakdown, kmax, stagnation };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::discrepancy: return "discrepancy";
    case StopReason::breakdown: return "breakdown";
    case StopReason::kmax: return "kmax";
    case StopReason::stagnation: return "stagnation";
  }
  return "?";
}

struct SolveHistory {
  std::vector<double> iterate_relerr;      // vs x_exact, when supplied
  std::vector<double> relres;              // ||r_k|| / ||b||, from projected quantities
  std::vector<ComplexVector> iterates;     // solution-space iterates
  std::vector<double> params;              // per-iteration regularization metadata
  std::size_t stop_index = 0;
  StopReason stop_reason = StopReason::kmax;
  ComplexVector x_best;   // argmin relative error when x_exact is known
  ComplexVector x_final;

  double best_relerr() const {
    double best = std::numeric_limits<double>::infinity();
    for (double e : iterate_relerr) best = std::min(best, e);
    return best;
  }
};

/// Optional change of variables applied to raw iterates before error
/// bookkeeping (right-preconditioned solves record x = M y).
using SolutionMap = std::function<ComplexVector(const ComplexVector&)>;

namespace detail {

inline void record_iterate(SolveHistory& hist, ComplexVector x, double relres,
                           const ComplexVector* x_exact, double x_exact_norm, double& best_err) {
  hist.relres.push_back(relres);
  if (x_exact != nullptr) {
    const double err = norm(subtract(*x_exact, x)) / x_exact_norm;
    hist.iterate_relerr.push_back(err);
    if (err < best_err) {
      best_err = err;
      hist.x_best = x;
    }
  }
  hist.iterates.push_back(std::move(x));
}

// relres decreased by less than 1e-14 over 5 consecutive steps
inline bool stagnated(const std::vector<double>& relres) {
  const std::size_t window = 5;
  if (relres.size() < window + 1) return false;
  const double drop = relres[relres.size() - window - 1] - relres.back();
  return drop < 1e-14;
}

}  // namespace detail

/// GMRES with x_0 = 0: the k-th iterate minimizes ||A x - b|| over the
/// Krylov space K_k(A, b). Residual norms come from the projected
/// Hessenberg problem, so no extra applications of A are needed. Stops at
/// the discrepancy rule, breakdown, stagnation, or kmax.
inline SolveHistory gmres(const LinearOperator& A, const ComplexVector& b,
                          const DiscrepancyRule& rule, std::size_t kmax,
                          const ComplexVector* x_exact = nullptr, const SolutionMap& map = {},
                          bool reorthogonalize = true, bool stagnation_guard = true) {
  if (A.dim_in() != A.dim_out()) throw std::invalid_argument("gmres: operator must be square");
  if (b.size() != A.dim_in()) throw std::invalid_argument("gmres: dimension mismatch");
  const double bnorm = norm(b);
  if (bnorm <= 0.0) throw std::invalid_argument("gmres: zero right-hand side");

  ArnoldiBuilder builder(A, b, reorthogonalize);
  SolveHistory hist;
  double best_err = std::numeric_limits<double>::infinity();
  const double xnorm = (x_exact != nullptr) ? norm(*x_exact) : 1.0;
  hist.stop_reason = StopReason::kmax;

  for (std::size_t k = 1; k <= kmax; ++k) {
    const bool ok = builder.step();
    const ComplexMatrix h = builder.hessenberg_block(builder.steps());
    const HessenbergLstsqResult ls = hessenberg_lstsq(h, bnorm);

    ComplexVector x(b.size(), Complex(0.0));
    const auto& basis = builder.basis_vectors();
    for (std::size_t j = 0; j < ls.y.size(); ++j) axpy(ls.y[j], basis[j], x);
    if (map) x = map(x);
    detail::record_iterate(hist, std::move(x), ls.resnorm / bnorm, x_exact, xnorm, best_err);
    hist.stop_index = k;

    if (rule.fires(ls.resnorm)) {
      hist.stop_reason = StopReason::discrepancy;
      break;
    }
    if (!ok) {
      hist.stop_reason = StopReason::breakdown;
      break;
    }
    if (stagnation_guard && detail::stagnated(hist.relres)) {
      hist.stop_reason = StopReason::stagnation;
      break;
    }
  }
  hist.x_final = hist.iterates.empty() ? ComplexVector(b.size(), Complex(0.0)) : hist.iterates.back();
  if (hist.x_best.empty()) hist.x_best = hist.x_final;
  return hist;
}

/// LSQR on the normal equations through Golub-Kahan bidiagonalization,
/// requiring adjoint applications. Both bases are kept and fully
/// reorthogonalized, which favors reproducibility over speed at the
/// problem sizes this library targets.
inline SolveHistory lsqr(const LinearOperator& A, const ComplexVector& b,
                         const DiscrepancyRule& rule, std::size_t kmax,
                         const ComplexVector* x_exact = nullptr, const SolutionMap& map = {},
                         bool stagnation_guard = true) {
  if (!A.has_adjoint()) throw std::invalid_argument("lsqr: operator provides no adjoint");
  if (b.size() != A.dim_out()) throw std::invalid_argument("lsqr: dimension mismatch");
  const double bnorm = norm(b);
  if (bnorm <= 0.0) throw std::invalid_argument("lsqr: zero right-hand side");

  SolveHistory hist;
  hist.stop_reason = StopReason::kmax;
  double best_err = std::numeric_limits<double>::infinity();
  const double xnorm = (x_exact != nullptr) ? norm(*x_exact) : 1.0;

  std::vector<ComplexVector> ubasis, vbasis;
  auto reorth = [](const std::vector<ComplexVector>& basis, ComplexVector& w) {
    for (int pass = 0; pass < 2; ++pass)
      for (const ComplexVector& q : basis) axpy(-dot(q, w), q, w);
  };

  double beta = bnorm;
  ComplexVector u = scaled(b, 1.0 / beta);
  ubasis.push_back(u);
  ComplexVector v = A.apply_adjoint(u);
  double alpha = norm(v);
  if (alpha == 0.0) {
    // b is orthogonal to the range of A; x = 0 is the least-squares solution
    hist.x_final = ComplexVector(A.dim_in(), Complex(0.0));
    hist.x_best = hist.x_final;
    hist.stop_reason = StopReason::breakdown;
    return hist;
  }
  v = scaled(v, 1.0 / alpha);
  vbasis.push_back(v);

  ComplexVector w = v;
  ComplexVector x(A.dim_in(), Complex(0.0));
  double phibar = beta;
  double rhobar = alpha;

  for (std::size_t k = 1; k <= kmax; ++k) {
    // continue the bidiagonalization
    const ComplexVector av = A.apply(v);
    const double av_norm = norm(av);
    ComplexVector unext = subtract(av, scaled(u, alpha));
    reorth(ubasis, unext);
    const double beta_next = norm(unext);
    double alpha_next = 0.0;
    bool terminal = false;
    if (beta_next > 1e-14 * av_norm && beta_next > 0.0) {
      unext = scaled(unext, 1.0 / beta_next);
      ubasis.push_back(unext);
      const ComplexVector atu = A.apply_adjoint(unext);
      const double atu_norm = norm(atu);
      ComplexVector vnext = subtract(atu, scaled(v, beta_next));
      reorth(vbasis, vnext);
      alpha_next = norm(vnext);
      if (alpha_next > 1e-14 * atu_norm && alpha_next > 0.0) {
        vnext = scaled(vnext, 1.0 / alpha_next);
        vbasis.push_back(vnext);
        v = vnext;
      } else {
        alpha_next = 0.0;
        terminal = true;
      }
      u = unext;
    } else {
      terminal = true;
    }

    // Givens update of the lower-bidiagonal least-squares problem
    const double rho = std::hypot(rhobar, beta_next);
    const double c = rhobar / rho;
    const double s = beta_next / rho;
    const double theta = s * alpha_next;
    rhobar = -c * alpha_next;
    const double phi = c * phibar;
    phibar = s * phibar;

    axpy(Complex(phi / rho), w, x);
    if (!terminal) w = subtract(v, scaled(w, Complex(theta / rho)));

    ComplexVector xr = map ? map(x) : x;
    detail::record_iterate(hist, std::move(xr), std::abs(phibar) / bnorm, x_exact, xnorm, best_err);
    hist.stop_index = k;

    if (rule.fires(std::abs(phibar))) {
      hist.stop_reason = StopReason::discrepancy;
      break;
    }
    if (terminal) {
      hist.stop_reason = StopReason::breakdown;
      break;
    }
    if (stagnation_guard && detail::stagnated(hist.relres)) {
      hist.stop_reason = StopReason::stagnation;
      break;
    }
  }
  hist.x_final = hist.iterates.empty() ? ComplexVector(A.dim_in(), Complex(0.0)) : hist.iterates.back();
  if (hist.x_best.empty()) hist.x_best = hist.x_final;
  return hist;
}

}  // namespace krylovreg
