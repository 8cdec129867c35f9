#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "types.hpp"

namespace krylovreg {

namespace detail {

inline bool all_real(const ComplexMatrix& a) {
  for (const Complex& z : a.data())
    if (z.imag() != 0.0) return false;
  return true;
}

// shortest exactly-round-tripping decimal form
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Writes a dense matrix in Matrix Market array format ("real general"
/// when every entry has zero imaginary part, else "complex general"),
/// with enough digits to reproduce the values bit-exactly on re-read.
inline void write_matrix_market(const std::string& path, const ComplexMatrix& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  const bool real = detail::all_real(a);
  out << "%%MatrixMarket matrix array " << (real ? "real" : "complex") << " general\n";
  out << a.rows() << " " << a.cols() << "\n";
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const Complex& z = a(i, j);
      out << detail::format_double(z.real());
      if (!real) out << " " << detail::format_double(z.imag());
      out << "\n";
    }
  if (!out) throw std::runtime_error("write_matrix_market: write failed for " + path);
}

inline void write_matrix_market(const std::string& path, const ComplexVector& v) {
  ComplexMatrix column(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) column(i, 0) = v[i];
  write_matrix_market(path, column);
}

/// Reads Matrix Market array or coordinate files with general symmetry,
/// real, integer, or complex fields.
inline ComplexMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_market: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix")
    throw std::runtime_error("read_matrix_market: not a Matrix Market matrix file: " + path);
  const bool array = format == "array";
  if (!array && format != "coordinate")
    throw std::runtime_error("read_matrix_market: unsupported format '" + format + "'");
  const bool complex_field = field == "complex";
  if (!complex_field && field != "real" && field != "integer")
    throw std::runtime_error("read_matrix_market: unsupported field '" + field + "'");
  if (symmetry != "general")
    throw std::runtime_error("read_matrix_market: only general symmetry is supported");

  std::string line;
  do {
    if (!std::getline(in, line)) throw std::runtime_error("read_matrix_market: truncated file");
  } while (!line.empty() && line[0] == '%');

  std::istringstream dims(line);
  std::size_t rows = 0, cols = 0, nnz = 0;
  dims >> rows >> cols;
  if (!array) dims >> nnz;
  if (rows == 0 || cols == 0) throw std::runtime_error("read_matrix_market: bad dimensions");

  ComplexMatrix a(rows, cols);
  if (array) {
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) {
        double re = 0.0, im = 0.0;
        if (!(in >> re)) throw std::runtime_error("read_matrix_market: truncated data");
        if (complex_field && !(in >> im))
          throw std::runtime_error("read_matrix_market: truncated data");
        a(i, j) = Complex(re, im);
      }
  } else {
    for (std::size_t e = 0; e < nnz; ++e) {
      std::size_t i = 0, j = 0;
      double re = 0.0, im = 0.0;
      if (!(in >> i >> j >> re)) throw std::runtime_error("read_matrix_market: truncated data");
      if (complex_field && !(in >> im))
        throw std::runtime_error("read_matrix_market: truncated data");
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw std::runtime_error("read_matrix_market: entry index out of range");
      a(i - 1, j - 1) = Complex(re, im);
    }
  }
  return a;
}

inline ComplexVector read_matrix_market_vector(const std::string& path) {
  const ComplexMatrix a = read_matrix_market(path);
  if (a.cols() != 1)
    throw std::runtime_error("read_matrix_market_vector: expected a single-column file");
  return a.column(0);
}

}  // namespace krylovreg
