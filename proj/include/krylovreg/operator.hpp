#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "dft.hpp"
#include "types.hpp"

namespace krylovreg {

enum class OperatorKind { dense, circulant, composite, arnoldi_lowrank, identity_minus_projection };

/// Immutable applicable map x -> Ax with dimension metadata and an optional
/// adjoint. Copies are cheap (shared state); concurrent apply calls are safe.
class LinearOperator {
 public:
  using ApplyFn = std::function<ComplexVector(const ComplexVector&)>;

  LinearOperator() = default;

  static LinearOperator make(std::size_t dim_out, std::size_t dim_in, OperatorKind kind,
                             ApplyFn apply, ApplyFn apply_adjoint = {}) {
    auto st = std::make_shared<State>();
    st->dim_out = dim_out;
    st->dim_in = dim_in;
    st->kind = kind;
    st->apply = std::move(apply);
    st->adjoint = std::move(apply_adjoint);
    LinearOperator op;
    op.state_ = std::move(st);
    return op;
  }

  std::size_t dim_in() const { return state_->dim_in; }
  std::size_t dim_out() const { return state_->dim_out; }
  OperatorKind kind() const { return state_->kind; }
  bool valid() const { return static_cast<bool>(state_); }

  ComplexVector apply(const ComplexVector& v) const {
    if (v.size() != state_->dim_in)
      throw std::invalid_argument("LinearOperator::apply: dimension mismatch");
    return state_->apply(v);
  }

  bool has_adjoint() const { return static_cast<bool>(state_->adjoint); }

  ComplexVector apply_adjoint(const ComplexVector& v) const {
    if (!has_adjoint())
      throw std::logic_error("LinearOperator::apply_adjoint: no adjoint available");
    if (v.size() != state_->dim_out)
      throw std::invalid_argument("LinearOperator::apply_adjoint: dimension mismatch");
    return state_->adjoint(v);
  }

  /// Non-null iff this operator is backed by an explicitly stored matrix.
  const ComplexMatrix* dense_matrix() const {
    return state_->has_dense ? &state_->dense : nullptr;
  }

 private:
  struct State {
    std::size_t dim_in = 0, dim_out = 0;
    OperatorKind kind = OperatorKind::dense;
    ApplyFn apply, adjoint;
    ComplexMatrix dense;
    bool has_dense = false;
  };
  std::shared_ptr<const State> state_;

  friend LinearOperator dense_operator(ComplexMatrix A);
};

inline LinearOperator dense_operator(ComplexMatrix A) {
  auto st = std::make_shared<LinearOperator::State>();
  st->dim_out = A.rows();
  st->dim_in = A.cols();
  st->kind = OperatorKind::dense;
  st->dense = std::move(A);
  st->has_dense = true;
  const ComplexMatrix* m = &st->dense;
  st->apply = [m](const ComplexVector& v) { return matvec(*m, v); };
  st->adjoint = [m](const ComplexVector& v) { return adjoint_matvec(*m, v); };
  LinearOperator op;
  op.state_ = std::move(st);
  return op;
}

inline LinearOperator identity_operator(std::size_t m) {
  return LinearOperator::make(
      m, m, OperatorKind::dense, [](const ComplexVector& v) { return v; },
      [](const ComplexVector& v) { return v; });
}

/// Circulant matrix C = W diag(symbol) W* held by its spectral symbol;
/// application and inversion cost O(m log m) through the FFT.
class CirculantOperator {
 public:
  explicit CirculantOperator(ComplexVector symbol) : symbol_(std::move(symbol)) {
    if (symbol_.empty()) throw std::invalid_argument("CirculantOperator: empty symbol");
  }

  /// Circulant whose first column is c.
  static CirculantOperator from_first_column(const ComplexVector& c) {
    ComplexVector d = unitary_dft(c, DftDirection::forward);
    const double scale = std::sqrt(static_cast<double>(c.size()));
    for (Complex& z : d) z *= scale;
    return CirculantOperator(std::move(d));
  }

  std::size_t size() const { return symbol_.size(); }
  const ComplexVector& symbol() const { return symbol_; }

  ComplexVector apply(const ComplexVector& v) const {
    ComplexVector t = unitary_dft(v, DftDirection::forward);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= symbol_[i];
    return unitary_dft(t, DftDirection::inverse);
  }

  ComplexVector apply_adjoint(const ComplexVector& v) const {
    ComplexVector t = unitary_dft(v, DftDirection::forward);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= std::conj(symbol_[i]);
    return unitary_dft(t, DftDirection::inverse);
  }

  double max_abs_symbol() const {
    double m = 0.0;
    for (const Complex& z : symbol_) m = std::max(m, std::abs(z));
    return m;
  }

  bool invertible() const {
    const double mx = max_abs_symbol();
    for (const Complex& z : symbol_)
      if (std::abs(z) <= 1e-14 * mx) return false;
    return !symbol_.empty() && max_abs_symbol() > 0.0;
  }

  /// Inverse circulant via symbol reciprocals. A near-zero symbol entry is
  /// an error naming the offending frequency index.
  CirculantOperator inverse() const {
    const double mx = max_abs_symbol();
    ComplexVector inv(symbol_.size());
    for (std::size_t i = 0; i < symbol_.size(); ++i) {
      if (std::abs(symbol_[i]) <= 1e-14 * mx)
        throw std::runtime_error("CirculantOperator::inverse: singular symbol at frequency index " +
                                 std::to_string(i));
      inv[i] = 1.0 / symbol_[i];
    }
    return CirculantOperator(std::move(inv));
  }

  /// Dense reconstruction, intended for small-m verification.
  ComplexMatrix to_dense() const {
    const std::size_t m = symbol_.size();
    ComplexMatrix C(m, m);
    for (std::size_t j = 0; j < m; ++j) C.set_column(j, apply(unit_vector(m, j)));
    return C;
  }

  LinearOperator as_operator() const {
    CirculantOperator self = *this;
    return LinearOperator::make(
        size(), size(), OperatorKind::circulant,
        [self](const ComplexVector& v) { return self.apply(v); },
        [self](const ComplexVector& v) { return self.apply_adjoint(v); });
  }

 private:
  ComplexVector symbol_;
};

inline LinearOperator circulant_operator(ComplexVector symbol) {
  return CirculantOperator(std::move(symbol)).as_operator();
}

/// Composition outer . inner; the adjoint composes in reverse when both
/// factors provide one.
namespace detail {

/// Symbol of the Frobenius-nearest circulant to a dense matrix, i.e. the
/// diagonal of W*AW, evaluated with 2m FFTs in O(m^2 log m).
inline ComplexVector nearest_circulant_symbol(const ComplexMatrix& a) {
  const std::size_t m = a.rows();
  // P = W* A: forward transform of every column
  ComplexMatrix p(m, m);
  for (std::size_t j = 0; j < m; ++j)
    p.set_column(j, unitary_dft(a.column(j), DftDirection::forward));
  // d_k = (P W)_{kk} = k-th entry of the inverse transform of row k of P
  ComplexVector d(m);
  ComplexVector row(m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < m; ++j) row[j] = p(k, j);
    d[k] = unitary_dft(row, DftDirection::inverse)[k];
  }
  return d;
}

}  // namespace detail

inline LinearOperator compose(const LinearOperator& outer, const LinearOperator& inner) {
  if (inner.dim_out() != outer.dim_in())
    throw std::invalid_argument("compose: inner.dim_out must equal outer.dim_in");
  LinearOperator::ApplyFn fwd = [outer, inner](const ComplexVector& v) {
    return outer.apply(inner.apply(v));
  };
  LinearOperator::ApplyFn adj;
  if (outer.has_adjoint() && inner.has_adjoint()) {
    adj = [outer, inner](const ComplexVector& v) {
      return inner.apply_adjoint(outer.apply_adjoint(v));
    };
  }
  return LinearOperator::make(outer.dim_out(), inner.dim_in(), OperatorKind::composite,
                              std::move(fwd), std::move(adj));
}

}  // namespace krylovreg
