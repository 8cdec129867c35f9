#pragma once

#include <optional>
#include <stdexcept>

#include "operator.hpp"
#include "types.hpp"

namespace krylovreg {

/// Partial Arnoldi decomposition A Vhat_k = V_{k+j} H_{k+j,k}.
///
/// For shift j = 1 this is the standard relation with Vhat_k the first k
/// columns of the basis. For j >= 2 the solution basis spans the Krylov
/// space generated from A^{j-1} b while the full basis still starts at
/// b/||b||; entries of H below the j-th subdiagonal are exactly zero.
struct ArnoldiDecomposition {
  ComplexMatrix basis;           // V: m x (k + j) orthonormal columns (fewer at breakdown)
  ComplexMatrix hessenberg;      // H: basis.cols-compatible, (k + j) x k
  ComplexMatrix solution_basis;  // Vhat: m x k, first column A^{j-1} b / ||.||
  std::size_t steps = 0;         // k
  std::size_t shift = 1;         // j
  std::optional<std::size_t> breakdown;
  double bnorm = 0.0;

  std::size_t dim() const { return basis.rows(); }

  /// Leading k-step part of a shift-1 decomposition.
  ArnoldiDecomposition truncated(std::size_t k) const {
    if (shift != 1) throw std::logic_error("ArnoldiDecomposition::truncated: shift-1 only");
    if (k > steps) throw std::invalid_argument("ArnoldiDecomposition::truncated: k too large");
    ArnoldiDecomposition out;
    const std::size_t vcols = std::min(k + 1, basis.cols());
    out.basis = basis.block(basis.rows(), vcols);
    out.hessenberg = hessenberg.block(std::min(k + 1, hessenberg.rows()), k);
    out.solution_basis = basis.block(basis.rows(), k);
    out.steps = k;
    out.shift = 1;
    out.bnorm = bnorm;
    if (breakdown && *breakdown <= k) out.breakdown = breakdown;
    return out;
  }
};

/// One-step-at-a-time modified Gram-Schmidt Arnoldi recursion on (A, b),
/// optionally with a second orthogonalization pass.
class ArnoldiBuilder {
 public:
  ArnoldiBuilder(const LinearOperator& A, const ComplexVector& b, bool reorthogonalize = true)
      : a_(A), reorth_(reorthogonalize) {
    if (A.dim_in() != A.dim_out()) throw std::invalid_argument("arnoldi: operator must be square");
    if (b.size() != A.dim_in()) throw std::invalid_argument("arnoldi: dimension mismatch");
    bnorm_ = norm(b);
    if (bnorm_ <= 0.0) throw std::invalid_argument("arnoldi: zero right-hand side");
    v_.push_back(scaled(b, 1.0 / bnorm_));
  }

  std::size_t steps() const { return steps_; }
  bool broken_down() const { return breakdown_.has_value(); }
  std::optional<std::size_t> breakdown() const { return breakdown_; }
  double bnorm() const { return bnorm_; }
  std::size_t dim() const { return a_.dim_in(); }

  double subdiagonal(std::size_t i) const { return subdiag_.at(i); }  // h_{i+2,i+1}, 0-based step i
  const std::vector<ComplexVector>& basis_vectors() const { return v_; }

  /// Attempts step k+1. Returns false when the new direction vanishes
  /// (invariant subspace reached); the completed decomposition stays valid.
  bool step() {
    if (breakdown_) return false;
    const std::size_t j = steps_;  // 0-based column index
    ComplexVector w = a_.apply(v_[j]);
    const double wnorm_initial = norm(w);
    h_.emplace_back(j + 2, Complex(0.0));
    ComplexVector& col = h_.back();
    for (std::size_t i = 0; i <= j; ++i) {
      const Complex hij = dot(v_[i], w);
      col[i] = hij;
      axpy(-hij, v_[i], w);
    }
    if (reorth_) {
      for (std::size_t i = 0; i <= j; ++i) {
        const Complex c = dot(v_[i], w);
        col[i] += c;
        axpy(-c, v_[i], w);
      }
    }
    const double hnext = norm(w);
    steps_ = j + 1;
    // the basis cannot grow past the space dimension
    if (v_.size() >= dim() || hnext <= 1e-14 * wnorm_initial || hnext == 0.0) {
      col[j + 1] = 0.0;
      breakdown_ = steps_;
      subdiag_.push_back(0.0);
      return false;
    }
    col[j + 1] = hnext;
    subdiag_.push_back(hnext);
    v_.push_back(scaled(w, 1.0 / hnext));
    return true;
  }

  /// Leading (k+1) x k block of the Hessenberg matrix for k <= steps().
  ComplexMatrix hessenberg_block(std::size_t k) const {
    ComplexMatrix h(k + 1, k);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < h_[j].size() && i < k + 1; ++i) h(i, j) = h_[j][i];
    return h;
  }

  /// Packages the standard (shift-1) decomposition for the completed steps.
  ArnoldiDecomposition finish() const {
    ArnoldiDecomposition d;
    const std::size_t m = dim();
    const std::size_t k = steps_;
    d.basis = ComplexMatrix(m, v_.size());
    for (std::size_t j = 0; j < v_.size(); ++j) d.basis.set_column(j, v_[j]);
    d.hessenberg = ComplexMatrix(k + 1, k);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < h_[j].size() && i < k + 1; ++i) d.hessenberg(i, j) = h_[j][i];
    d.solution_basis = d.basis.block(m, k);
    d.steps = k;
    d.shift = 1;
    d.breakdown = breakdown_;
    d.bnorm = bnorm_;
    return d;
  }

 private:
  LinearOperator a_;
  bool reorth_;
  double bnorm_ = 0.0;
  std::size_t steps_ = 0;
  std::optional<std::size_t> breakdown_;
  std::vector<ComplexVector> v_;
  std::vector<ComplexVector> h_;  // column j holds h_{1..j+2, j+1}
  std::vector<double> subdiag_;
};

namespace detail {

/// Builds the shifted decomposition A Vhat_k = V_{k+j} H_{k+j,k} from a
/// standard one of depth k+j-1. The coordinates of A^{j-1+i} b in the
/// standard basis form a staircase matrix whose Gram-Schmidt Q links the
/// two Hessenberg matrices.
inline ArnoldiDecomposition shift_decomposition(const ArnoldiDecomposition& std_dec,
                                                std::size_t k_target, std::size_t shift) {
  const std::size_t m = std_dec.dim();
  const ComplexMatrix& hh = std_dec.hessenberg;  // (s+1) x s, zero last row at breakdown
  const std::size_t s = std_dec.steps;
  const std::size_t vcols = std_dec.basis.cols();

  // coordinates of A^t b in the standard basis: c_t = H c_{t-1}; the
  // vectors needed for the solution space are c_{shift-1} .. c_{shift+k-2},
  // all of which live within the first `steps` basis columns
  const std::size_t qrows = s;
  std::vector<ComplexVector> coords;  // c_{shift-1+i}
  ComplexVector c(1, Complex(std_dec.bnorm));
  for (std::size_t t = 0; t < shift - 1 + k_target; ++t) {
    if (t >= shift - 1) coords.push_back(c);
    if (coords.size() == k_target) break;
    const std::size_t rows = std::min(c.size() + 1, qrows);
    ComplexVector next(rows, Complex(0.0));
    for (std::size_t j = 0; j < c.size() && j < s; ++j)
      for (std::size_t i = 0; i < rows && i < j + 2; ++i) next[i] += hh(i, j) * c[j];
    c = std::move(next);
  }

  // Gram-Schmidt on the staircase columns
  ComplexMatrix q(qrows, k_target);
  std::size_t kept = 0;
  std::optional<std::size_t> shifted_breakdown;
  for (std::size_t col = 0; col < k_target; ++col) {
    ComplexVector w(qrows, Complex(0.0));
    for (std::size_t i = 0; i < coords[col].size() && i < qrows; ++i) w[i] = coords[col][i];
    const double w0 = norm(w);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < kept; ++i) {
        Complex hij = 0.0;
        for (std::size_t r = 0; r < qrows; ++r) hij += std::conj(q(r, i)) * w[r];
        for (std::size_t r = 0; r < qrows; ++r) w[r] -= hij * q(r, i);
      }
    }
    const double wn = norm(w);
    if (wn <= 1e-14 * std::max(w0, 1e-300)) {
      shifted_breakdown = col;
      break;
    }
    for (std::size_t r = 0; r < qrows; ++r) q(r, kept) = w[r] / wn;
    ++kept;
  }
  const ComplexMatrix qk = q.block(qrows, kept);

  ArnoldiDecomposition out;
  out.basis = std_dec.basis;
  out.hessenberg = matmul(hh, qk);  // (s+1) x kept
  // ensure dims (k+j) x k by padding rows with zeros if the standard run
  // ended early, and zero everything below the j-th subdiagonal exactly
  ComplexMatrix hfull(vcols, kept);
  for (std::size_t j = 0; j < kept; ++j)
    for (std::size_t i = 0; i < out.hessenberg.rows() && i < vcols; ++i)
      hfull(i, j) = out.hessenberg(i, j);
  for (std::size_t j = 0; j < kept; ++j)
    for (std::size_t i = j + shift + 1; i < vcols; ++i) hfull(i, j) = 0.0;
  out.hessenberg = std::move(hfull);
  out.solution_basis = ComplexMatrix(m, kept);
  {
    // Vhat = V_{k+j-1} Q
    for (std::size_t j = 0; j < kept; ++j) {
      ComplexVector col(m, Complex(0.0));
      for (std::size_t r = 0; r < qrows; ++r) {
        const Complex qrj = q(r, j);
        if (qrj == Complex(0.0)) continue;
        axpy(qrj, std_dec.basis.column(r), col);
      }
      out.solution_basis.set_column(j, col);
    }
  }
  out.steps = kept;
  out.shift = shift;
  out.bnorm = std_dec.bnorm;
  if (shifted_breakdown)
    out.breakdown = *shifted_breakdown;
  else if (std_dec.breakdown)
    out.breakdown = std_dec.breakdown;
  return out;
}

}  // namespace detail

/// Arnoldi process with modified Gram-Schmidt and optional second pass.
/// shift = 1 is the standard process; shift >= 2 produces the range
/// restricted variant whose solution space starts at A^{shift-1} b.
/// Stops early at breakdown; the returned decomposition is valid for the
/// completed steps.
inline ArnoldiDecomposition arnoldi_process(const LinearOperator& A, const ComplexVector& b,
                                            std::size_t kmax, std::size_t shift = 1,
                                            bool reorthogonalize = true) {
  if (shift < 1) throw std::invalid_argument("arnoldi_process: shift must be >= 1");
  if (kmax < 1) throw std::invalid_argument("arnoldi_process: kmax must be >= 1");
  if (kmax + shift > A.dim_in())
    throw std::invalid_argument("arnoldi_process: kmax + shift exceeds the problem dimension");
  ArnoldiBuilder builder(A, b, reorthogonalize);
  const std::size_t std_steps = kmax + shift - 1;
  for (std::size_t t = 0; t < std_steps; ++t)
    if (!builder.step()) break;
  ArnoldiDecomposition std_dec = builder.finish();
  if (shift == 1) return std_dec;
  return detail::shift_decomposition(std_dec, kmax, shift);
}

/// Relative distance of x from the span of the computed basis:
/// ||x - V V* x|| / ||x||, defined as 0 for x = 0.
inline double krylov_membership(const ArnoldiDecomposition& decomp, const ComplexVector& x) {
  const double xn = norm(x);
  if (xn == 0.0) return 0.0;
  if (x.size() != decomp.dim()) throw std::invalid_argument("krylov_membership: dimension mismatch");
  ComplexVector r = x;
  const std::size_t n = decomp.basis.cols();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex h = 0.0;
      const Complex* vj = decomp.basis.col(j);
      for (std::size_t i = 0; i < r.size(); ++i) h += std::conj(vj[i]) * r[i];
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= h * vj[i];
    }
  }
  return norm(r) / xn;
}

struct DecompositionCheck {
  double relation_residual = 0.0;     // ||A Vhat - V H||_F
  double orthogonality_error = 0.0;   // ||V* V - I||_F
};

/// Direct evaluation of the decomposition invariants.
inline DecompositionCheck validate_decomposition(const LinearOperator& A,
                                                 const ArnoldiDecomposition& d) {
  DecompositionCheck out;
  const std::size_t k = d.steps;
  ComplexMatrix av(d.dim(), k);
  for (std::size_t j = 0; j < k; ++j) av.set_column(j, A.apply(d.solution_basis.column(j)));
  const ComplexMatrix vh = matmul(d.basis, d.hessenberg.block(d.basis.cols(), k));
  out.relation_residual = frobenius_norm(subtract(av, vh));
  const ComplexMatrix g = matmul(adjoint(d.basis), d.basis);
  out.orthogonality_error = frobenius_norm(subtract(g, ComplexMatrix::identity(d.basis.cols())));
  return out;
}

}  // namespace krylovreg
