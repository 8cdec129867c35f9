#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace krylovreg {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Euclidean norm.
inline double norm(const ComplexVector& v) {
  double s = 0.0;
  for (const Complex& z : v) s += std::norm(z);
  return std::sqrt(s);
}

/// Inner product, conjugate-linear in the first argument.
inline Complex dot(const ComplexVector& a, const ComplexVector& b) {
  assert(a.size() == b.size());
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline void axpy(const Complex& alpha, const ComplexVector& x, ComplexVector& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline ComplexVector scaled(const ComplexVector& v, const Complex& alpha) {
  ComplexVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = alpha * v[i];
  return out;
}

inline ComplexVector subtract(const ComplexVector& a, const ComplexVector& b) {
  assert(a.size() == b.size());
  ComplexVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline ComplexVector add(const ComplexVector& a, const ComplexVector& b) {
  assert(a.size() == b.size());
  ComplexVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

/// j-th axis vector of length m.
inline ComplexVector unit_vector(std::size_t m, std::size_t j) {
  ComplexVector e(m, Complex(0.0));
  assert(j < m);
  e[j] = 1.0;
  return e;
}

inline bool all_finite(const ComplexVector& v) {
  for (const Complex& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

/// Dense complex matrix, column-major storage.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex(0.0)) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[j * rows_ + i];
  }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[j * rows_ + i];
  }

  Complex* col(std::size_t j) { return data_.data() + j * rows_; }
  const Complex* col(std::size_t j) const { return data_.data() + j * rows_; }

  ComplexVector column(std::size_t j) const {
    return ComplexVector(col(j), col(j) + rows_);
  }
  void set_column(std::size_t j, const ComplexVector& v) {
    assert(v.size() == rows_);
    std::copy(v.begin(), v.end(), col(j));
  }

  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  /// Copy of the leading r x c block.
  ComplexMatrix block(std::size_t r, std::size_t c) const {
    assert(r <= rows_ && c <= cols_);
    ComplexMatrix B(r, c);
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t i = 0; i < r; ++i) B(i, j) = (*this)(i, j);
    return B;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline double frobenius_norm(const ComplexMatrix& A) {
  double s = 0.0;
  for (const Complex& z : A.data()) s += std::norm(z);
  return std::sqrt(s);
}

inline ComplexMatrix adjoint(const ComplexMatrix& A) {
  ComplexMatrix B(A.cols(), A.rows());
  for (std::size_t j = 0; j < A.cols(); ++j)
    for (std::size_t i = 0; i < A.rows(); ++i) B(j, i) = std::conj(A(i, j));
  return B;
}

/// y = A x.
inline ComplexVector matvec(const ComplexMatrix& A, const ComplexVector& x) {
  if (x.size() != A.cols()) throw std::invalid_argument("matvec: dimension mismatch");
  ComplexVector y(A.rows(), Complex(0.0));
  for (std::size_t j = 0; j < A.cols(); ++j) {
    const Complex xj = x[j];
    if (xj == Complex(0.0)) continue;
    const Complex* aj = A.col(j);
    for (std::size_t i = 0; i < A.rows(); ++i) y[i] += aj[i] * xj;
  }
  return y;
}

/// y = A* x.
inline ComplexVector adjoint_matvec(const ComplexMatrix& A, const ComplexVector& x) {
  if (x.size() != A.rows()) throw std::invalid_argument("adjoint_matvec: dimension mismatch");
  ComplexVector y(A.cols(), Complex(0.0));
  for (std::size_t j = 0; j < A.cols(); ++j) {
    const Complex* aj = A.col(j);
    Complex s = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) s += std::conj(aj[i]) * x[i];
    y[j] = s;
  }
  return y;
}

inline ComplexMatrix matmul(const ComplexMatrix& A, const ComplexMatrix& B) {
  if (A.cols() != B.rows()) throw std::invalid_argument("matmul: dimension mismatch");
  ComplexMatrix C(A.rows(), B.cols());
  for (std::size_t j = 0; j < B.cols(); ++j) {
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const Complex bkj = B(k, j);
      if (bkj == Complex(0.0)) continue;
      const Complex* ak = A.col(k);
      Complex* cj = C.col(j);
      for (std::size_t i = 0; i < A.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  return C;
}

inline ComplexMatrix subtract(const ComplexMatrix& A, const ComplexMatrix& B) {
  assert(A.rows() == B.rows() && A.cols() == B.cols());
  ComplexMatrix C(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.data().size(); ++i) C.data()[i] = A.data()[i] - B.data()[i];
  return C;
}

inline ComplexMatrix add(const ComplexMatrix& A, const ComplexMatrix& B) {
  assert(A.rows() == B.rows() && A.cols() == B.cols());
  ComplexMatrix C(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.data().size(); ++i) C.data()[i] = A.data()[i] + B.data()[i];
  return C;
}

inline Complex trace(const ComplexMatrix& A) {
  assert(A.rows() == A.cols());
  Complex t = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) t += A(i, i);
  return t;
}

}  // namespace krylovreg
