#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "arnoldi.hpp"
#include "linalg.hpp"
#include "operator.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace krylovreg {

/// Frobenius-nearest circulant C_A = W D_A W* of a dense-backed operator,
/// with D_A the diagonal of W*AW.
inline CirculantOperator nearest_circulant(const LinearOperator& a) {
  const ComplexMatrix* dense = a.dense_matrix();
  if (dense == nullptr)
    throw std::invalid_argument("nearest_circulant: operator is not dense-backed");
  if (dense->rows() != dense->cols())
    throw std::invalid_argument("nearest_circulant: matrix not square");
  return CirculantOperator(detail::nearest_circulant_symbol(*dense));
}

/// Circulant C minimizing ||I - C^{-1} A||_F, namely C_{AA*} C_{A*}^{-1}.
/// Under the unitary DFT convention the symbols divide entrywise:
/// d_k = ||row k of W*A||^2 / conj(d_A)_k, computed with m FFTs.
inline CirculantOperator tyrt_circulant(const LinearOperator& a) {
  const ComplexMatrix* dense = a.dense_matrix();
  if (dense == nullptr)
    throw std::invalid_argument("tyrt_circulant: operator is not dense-backed");
  const std::size_t m = dense->rows();
  if (dense->cols() != m) throw std::invalid_argument("tyrt_circulant: matrix not square");

  ComplexMatrix p(m, m);  // W* A
  for (std::size_t j = 0; j < m; ++j)
    p.set_column(j, unitary_dft(dense->column(j), DftDirection::forward));

  // d_A from the diagonal of W*AW; d_{AA*} from the row norms of W*A
  ComplexVector d_a(m);
  ComplexVector row(m);
  std::vector<double> d_aa(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = p(k, j);
      d_aa[k] += std::norm(p(k, j));
    }
    d_a[k] = unitary_dft(row, DftDirection::inverse)[k];
  }

  double max_abs = 0.0;
  for (const Complex& z : d_a) max_abs = std::max(max_abs, std::abs(z));
  ComplexVector symbol(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Complex d_astar = std::conj(d_a[k]);
    if (std::abs(d_astar) <= 1e-14 * max_abs)
      throw std::runtime_error("tyrt_circulant: singular symbol of the adjoint circulant at "
                               "frequency index " + std::to_string(k));
    symbol[k] = d_aa[k] / d_astar;
  }
  return CirculantOperator(std::move(symbol));
}

/// Interpolatory circulant from a single seeded random probe: y = Ax and
/// D_A = diag[(W*y) ./ (W*x)], two FFTs plus one operator application.
inline CirculantOperator probe_circulant(const LinearOperator& a, std::uint64_t seed) {
  if (a.dim_in() != a.dim_out()) throw std::invalid_argument("probe_circulant: operator not square");
  const std::size_t m = a.dim_in();
  GaussianStream g(seed);
  ComplexVector x(m);
  for (Complex& z : x) z = g.next();
  const ComplexVector y = a.apply(x);
  const ComplexVector fx = unitary_dft(x, DftDirection::forward);
  const ComplexVector fy = unitary_dft(y, DftDirection::forward);
  const double floor = 1e-12 * norm(x) / std::sqrt(static_cast<double>(m));
  ComplexVector symbol(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (std::abs(fx[k]) < floor)
      throw std::runtime_error("probe_circulant: near-zero probe spectrum at frequency index " +
                               std::to_string(k) + "; retry with another seed");
    symbol[k] = fy[k] / fx[k];
  }
  return CirculantOperator(std::move(symbol));
}

enum class PreconditionerVariant { c1, c2, c3, m1, m2, m3, m4 };

inline const char* to_string(PreconditionerVariant v) {
  switch (v) {
    case PreconditionerVariant::c1: return "c1";
    case PreconditionerVariant::c2: return "c2";
    case PreconditionerVariant::c3: return "c3";
    case PreconditionerVariant::m1: return "m1";
    case PreconditionerVariant::m2: return "m2";
    case PreconditionerVariant::m3: return "m3";
    case PreconditionerVariant::m4: return "m4";
  }
  return "?";
}

/// A right preconditioner: M itself and the preconditioned operator AM.
struct Preconditioner {
  PreconditionerVariant variant = PreconditionerVariant::c1;
  LinearOperator m_op;
  LinearOperator am_op;
  std::size_t kp = 0;  // Arnoldi variants only
  std::shared_ptr<const ArnoldiDecomposition> source;
};

namespace detail {

// coefficients V_{1..n}^* v
inline ComplexVector basis_coefficients(const ComplexMatrix& v, std::size_t n,
                                        const ComplexVector& x) {
  ComplexVector c(n, Complex(0.0));
  for (std::size_t j = 0; j < n; ++j) {
    const Complex* col = v.col(j);
    Complex s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(col[i]) * x[i];
    c[j] = s;
  }
  return c;
}

inline ComplexVector basis_combine(const ComplexMatrix& v, const ComplexVector& c) {
  ComplexVector out(v.rows(), Complex(0.0));
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] == Complex(0.0)) continue;
    const Complex* col = v.col(j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[j] * col[i];
  }
  return out;
}

// y = H x or y = H* x on leading blocks
inline ComplexVector hess_apply(const ComplexMatrix& h, std::size_t rows, std::size_t cols,
                                const ComplexVector& x, bool adjoint_apply) {
  ComplexVector y(adjoint_apply ? cols : rows, Complex(0.0));
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) {
      if (adjoint_apply)
        y[j] += std::conj(h(i, j)) * x[i];
      else
        y[i] += h(i, j) * x[j];
    }
  return y;
}

inline void check_preconditioned_consistency(const LinearOperator& a, const LinearOperator& m_op,
                                             const LinearOperator& am_op, double scale) {
  GaussianStream g(0x5eedu);
  for (int probe = 0; probe < 2; ++probe) {
    ComplexVector v(a.dim_in());
    for (Complex& z : v) z = Complex(g.next(), g.next());
    const ComplexVector lhs = am_op.apply(v);
    const ComplexVector rhs = a.apply(m_op.apply(v));
    const double err = norm(subtract(lhs, rhs));
    const double ref = std::max({norm(lhs), norm(rhs), scale * norm(v)});
    if (err > 1e-9 * ref)
      throw std::runtime_error("arnoldi_preconditioner: structural AM disagrees with A*M");
  }
}

}  // namespace detail

/// Arnoldi-based right preconditioners built from a depth-kp (kp+1 for the
/// m3/m4 variants) decomposition of A with starting vector b:
///   m1: M = A_kp*,              AM = C C* with C = V_{kp+1} H_{kp+1,kp}
///   m2: M = A_kp* + (I - VV*),  AM = structural low-rank part + A(I - VV*)
///   m3: M = A_kp,               AM = V_{kp+2} H_{kp+2,kp+1} H_{kp+1,kp} V_kp*
///   m4: M = A_kp + (I - VV*),   AM = m3 low-rank part + A(I - VV*)
/// where A_kp = V_{kp+1} H_{kp+1,kp} V_kp*. Only m2/m4 touch A again.
inline Preconditioner arnoldi_preconditioner(const ArnoldiDecomposition& decomp,
                                             PreconditionerVariant variant,
                                             const LinearOperator& a) {
  if (variant != PreconditionerVariant::m1 && variant != PreconditionerVariant::m2 &&
      variant != PreconditionerVariant::m3 && variant != PreconditionerVariant::m4)
    throw std::invalid_argument("arnoldi_preconditioner: circulant variant passed");
  if (decomp.shift != 1)
    throw std::invalid_argument("arnoldi_preconditioner: shift-1 decomposition required");
  const bool needs_extra = (variant == PreconditionerVariant::m3 ||
                            variant == PreconditionerVariant::m4);
  const std::size_t kp = needs_extra ? decomp.steps - 1 : decomp.steps;
  if (needs_extra && decomp.steps < 2)
    throw std::invalid_argument("arnoldi_preconditioner: decomposition too shallow");
  const std::size_t need_cols = kp + (needs_extra ? 2 : 1);
  if (decomp.basis.cols() < need_cols)
    throw std::invalid_argument(
        "arnoldi_preconditioner: decomposition broke down before the required depth");

  auto d = std::make_shared<const ArnoldiDecomposition>(decomp);
  const std::size_t m = d->dim();
  const double hscale = frobenius_norm(d->hessenberg);

  using detail::basis_coefficients;
  using detail::basis_combine;
  using detail::hess_apply;

  // A_kp z = V_{kp+1} H (V_kp^* z) and its adjoint
  auto akp_apply = [d, kp](const ComplexVector& z) {
    const ComplexVector c = basis_coefficients(d->basis, kp, z);
    return basis_combine(d->basis, hess_apply(d->hessenberg, kp + 1, kp, c, false));
  };
  auto akp_adjoint = [d, kp](const ComplexVector& z) {
    const ComplexVector c = basis_coefficients(d->basis, kp + 1, z);
    return basis_combine(d->basis, hess_apply(d->hessenberg, kp + 1, kp, c, true));
  };
  auto complement = [d, kp](const ComplexVector& z) {  // (I - V_kp V_kp^*) z
    const ComplexVector c = basis_coefficients(d->basis, kp, z);
    ComplexVector out = z;
    const ComplexVector vv = basis_combine(d->basis, c);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= vv[i];
    return out;
  };

  Preconditioner p;
  p.variant = variant;
  p.kp = kp;
  p.source = d;

  switch (variant) {
    case PreconditionerVariant::m1: {
      p.m_op = LinearOperator::make(m, m, OperatorKind::arnoldi_lowrank, akp_adjoint, akp_apply);
      auto am = [d, kp](const ComplexVector& z) {
        const ComplexVector c = basis_coefficients(d->basis, kp + 1, z);
        const ComplexVector hc = hess_apply(d->hessenberg, kp + 1, kp, c, true);
        return basis_combine(d->basis, hess_apply(d->hessenberg, kp + 1, kp, hc, false));
      };
      p.am_op = LinearOperator::make(m, m, OperatorKind::arnoldi_lowrank, am, am);  // Hermitian
      break;
    }
    case PreconditionerVariant::m2: {
      auto m_apply = [akp_adjoint, complement](const ComplexVector& z) {
        ComplexVector out = akp_adjoint(z);
        const ComplexVector orth = complement(z);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += orth[i];
        return out;
      };
      auto m_adjoint = [akp_apply, complement](const ComplexVector& z) {
        ComplexVector out = akp_apply(z);
        const ComplexVector orth = complement(z);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += orth[i];
        return out;
      };
      p.m_op = LinearOperator::make(m, m, OperatorKind::composite, m_apply, m_adjoint);
      auto am = [d, kp, a, complement](const ComplexVector& z) {
        const ComplexVector c = basis_coefficients(d->basis, kp + 1, z);
        const ComplexVector hc = hess_apply(d->hessenberg, kp + 1, kp, c, true);
        ComplexVector out = basis_combine(d->basis, hess_apply(d->hessenberg, kp + 1, kp, hc, false));
        const ComplexVector fresh = a.apply(complement(z));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += fresh[i];
        return out;
      };
      LinearOperator::ApplyFn am_adjoint;
      if (a.has_adjoint()) {
        am_adjoint = [m_adjoint, a](const ComplexVector& z) { return m_adjoint(a.apply_adjoint(z)); };
      }
      p.am_op = LinearOperator::make(m, m, OperatorKind::composite, am, am_adjoint);
      detail::check_preconditioned_consistency(a, p.m_op, p.am_op, hscale);
      break;
    }
    case PreconditionerVariant::m3:
    case PreconditionerVariant::m4: {
      // G = H_{kp+2,kp+1} H_{kp+1,kp}
      const ComplexMatrix g =
          matmul(d->hessenberg.block(kp + 2, kp + 1), d->hessenberg.block(kp + 1, kp));
      auto lowrank = [d, g, kp](const ComplexVector& z) {
        const ComplexVector c = basis_coefficients(d->basis, kp, z);
        return basis_combine(d->basis, matvec(g, c));
      };
      auto lowrank_adjoint = [d, g, kp](const ComplexVector& z) {
        const ComplexVector c = basis_coefficients(d->basis, kp + 2, z);
        return basis_combine(d->basis, adjoint_matvec(g, c));
      };
      if (variant == PreconditionerVariant::m3) {
        p.m_op = LinearOperator::make(m, m, OperatorKind::arnoldi_lowrank, akp_apply, akp_adjoint);
        p.am_op =
            LinearOperator::make(m, m, OperatorKind::arnoldi_lowrank, lowrank, lowrank_adjoint);
      } else {
        auto m_apply = [akp_apply, complement](const ComplexVector& z) {
          ComplexVector out = akp_apply(z);
          const ComplexVector orth = complement(z);
          for (std::size_t i = 0; i < out.size(); ++i) out[i] += orth[i];
          return out;
        };
        auto m_adjoint = [akp_adjoint, complement](const ComplexVector& z) {
          ComplexVector out = akp_adjoint(z);
          const ComplexVector orth = complement(z);
          for (std::size_t i = 0; i < out.size(); ++i) out[i] += orth[i];
          return out;
        };
        p.m_op = LinearOperator::make(m, m, OperatorKind::composite, m_apply, m_adjoint);
        auto am = [lowrank, a, complement](const ComplexVector& z) {
          ComplexVector out = lowrank(z);
          const ComplexVector fresh = a.apply(complement(z));
          for (std::size_t i = 0; i < out.size(); ++i) out[i] += fresh[i];
          return out;
        };
        LinearOperator::ApplyFn am_adjoint;
        if (a.has_adjoint()) {
          am_adjoint = [m_adjoint, a](const ComplexVector& z) {
            return m_adjoint(a.apply_adjoint(z));
          };
        }
        p.am_op = LinearOperator::make(m, m, OperatorKind::composite, am, am_adjoint);
      }
      detail::check_preconditioned_consistency(a, p.m_op, p.am_op, hscale);
      break;
    }
    default:
      break;
  }
  if (variant == PreconditionerVariant::m1)
    detail::check_preconditioned_consistency(a, p.m_op, p.am_op, hscale);
  return p;
}

/// Circulant right preconditioner M = C^{-1}; AM is the composition. The
/// nearest-circulant and least-squares variants need a dense-backed
/// operator, the probe variant works matrix-free.
inline Preconditioner circulant_preconditioner(const LinearOperator& a,
                                               PreconditionerVariant variant,
                                               std::uint64_t probe_seed = 0) {
  CirculantOperator c = [&] {
    switch (variant) {
      case PreconditionerVariant::c1: return nearest_circulant(a);
      case PreconditionerVariant::c2: return tyrt_circulant(a);
      case PreconditionerVariant::c3: return probe_circulant(a, probe_seed);
      default:
        throw std::invalid_argument("circulant_preconditioner: Arnoldi variant passed");
    }
  }();
  Preconditioner p;
  p.variant = variant;
  p.m_op = c.inverse().as_operator();
  p.am_op = compose(a, p.m_op);
  return p;
}

struct KpThresholds {
  double tau1_prime = 1e-4;
  double tau1_double_prime = 0.9;
  double tau2 = 1e-10;
};

enum class KpRule { stop1, stop2, manual };

inline const char* to_string(KpRule r) {
  switch (r) {
    case KpRule::stop1: return "stop1";
    case KpRule::stop2: return "stop2";
    case KpRule::manual: return "manual";
  }
  return "?";
}

struct KpDiagnostic {
  double subdiagonal = 0.0;    // h_{i+1,i}
  double sigma_product = 0.0;  // sigma_1(H_{i+1,i}) * sigma_{i+1}(H_{i+2,i+1})
};

struct KpSelection {
  std::size_t kp = 0;
  KpRule rule = KpRule::manual;  // the rule that determined kp
  bool rule_fired = false;       // false: manual fallback at kmax
  bool breakdown = false;
  std::vector<KpDiagnostic> trace;
};

/// Scans the Arnoldi process on (A, b) for the smallest index satisfying
/// the chosen subdiagonal or singular-value-product stopping rule. If no
/// rule fires by kmax the selection falls back to kmax (recorded as
/// manual); breakdown yields the breakdown index, flagged.
inline KpSelection select_kp(const LinearOperator& a, const ComplexVector& b, std::size_t kmax,
                             const KpThresholds& taus, KpRule rule, bool reorthogonalize = true) {
  if (kmax < 1) throw std::invalid_argument("select_kp: kmax must be >= 1");
  if (kmax + 2 > a.dim_in())
    throw std::invalid_argument("select_kp: kmax must not exceed dim - 2");

  ArnoldiBuilder builder(a, b, reorthogonalize);
  KpSelection sel;
  sel.rule = rule;

  std::vector<double> first_sigma;  // sigma_1 of H_{i+1,i}, 1-based index i
  for (std::size_t i = 1; i <= kmax; ++i) {
    while (builder.steps() < i + 1 && !builder.broken_down()) builder.step();
    if (builder.broken_down() && builder.steps() <= i) {
      sel.kp = *builder.breakdown();
      sel.breakdown = true;
      sel.rule_fired = false;
      return sel;
    }

    const double h_next = builder.subdiagonal(i - 1);
    if (first_sigma.size() < i) {
      const SvdResult s = svd_small(builder.hessenberg_block(i));
      first_sigma.push_back(s.sigma.front());
    }
    const SvdResult s_next = svd_small(builder.hessenberg_block(i + 1));
    first_sigma.push_back(s_next.sigma.front());
    const double p_sigma = first_sigma[i - 1] * s_next.sigma.back();
    sel.trace.push_back({h_next, p_sigma});

    bool fired = false;
    if (rule == KpRule::stop1 && i >= 2) {
      const double h_prev = builder.subdiagonal(i - 2);
      fired = h_next < taus.tau1_prime &&
              h_prev > 0.0 && std::abs(h_next - h_prev) / h_prev > taus.tau1_double_prime;
    } else if (rule == KpRule::stop2) {
      fired = p_sigma < taus.tau2;
    }
    if (fired) {
      sel.kp = i;
      sel.rule_fired = true;
      return sel;
    }
  }
  sel.kp = kmax;
  sel.rule = KpRule::manual;
  sel.rule_fired = false;
  return sel;
}

}  // namespace krylovreg
