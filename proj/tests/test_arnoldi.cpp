#include <krylovreg/arnoldi.hpp>
#include <krylovreg/linalg.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace krylovreg;

TEST_CASE("downshift Krylov basis is a window of axis vectors") {
  const LinearOperator a = dense_operator(oracles::downshift_matrix(10));
  const ArnoldiDecomposition d = arnoldi_process(a, unit_vector(10, 1), 3);
  REQUIRE(d.steps == 3);
  REQUIRE(d.basis.cols() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const ComplexVector expected = unit_vector(10, j + 1);
    CHECK(norm(subtract(d.basis.column(j), expected)) == 0.0);
  }
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 4; ++i) {
      const Complex expected = (i == j + 1) ? Complex(1.0) : Complex(0.0);
      CHECK(std::abs(d.hessenberg(i, j) - expected) == 0.0);
    }
}

TEST_CASE("identity operator breaks down immediately") {
  const LinearOperator a = identity_operator(6);
  const ComplexVector b = oracles::random_vector(6, 5);
  const ArnoldiDecomposition d = arnoldi_process(a, b, 4);
  REQUIRE(d.breakdown.has_value());
  CHECK(*d.breakdown == 1);
  CHECK(d.steps == 1);
  REQUIRE(d.hessenberg.rows() == 2);
  CHECK(std::abs(d.hessenberg(0, 0) - Complex(1.0)) < 1e-13);
  CHECK(std::abs(d.hessenberg(1, 0)) == 0.0);
}

TEST_CASE("decomposition residual is tiny on a random matrix") {
  const ComplexMatrix am = oracles::random_matrix(12, 12, 42);
  const LinearOperator a = dense_operator(am);
  const ComplexVector b = oracles::random_vector(12, 43);
  const ArnoldiDecomposition d = arnoldi_process(a, b, 6);
  const DecompositionCheck c = validate_decomposition(a, d);
  CHECK(c.relation_residual <= 1e-11 * frobenius_norm(am));
  CHECK(c.orthogonality_error <= 1e-12 * 6);
}

TEST_CASE("orthogonality drift bounds with and without the second pass") {
  const ComplexMatrix am = oracles::random_matrix(40, 40, 77);
  const LinearOperator a = dense_operator(am);
  const ComplexVector b = oracles::random_vector(40, 78);
  const std::size_t k = 20;
  const DecompositionCheck with = validate_decomposition(a, arnoldi_process(a, b, k, 1, true));
  const DecompositionCheck without = validate_decomposition(a, arnoldi_process(a, b, k, 1, false));
  CHECK(with.orthogonality_error <= 1e-12 * k);
  CHECK(without.orthogonality_error <= 1e-6 * k);
}

TEST_CASE("downshift with b = e_2 breaks down at step m-1") {
  const std::size_t m = 12;
  const LinearOperator a = dense_operator(oracles::downshift_matrix(m));
  const ArnoldiDecomposition d = arnoldi_process(a, unit_vector(m, 1), m - 1);
  REQUIRE(d.breakdown.has_value());
  CHECK(*d.breakdown == m - 1);
}

TEST_CASE("subdiagonal products are bounded by singular value products") {
  const ComplexMatrix am = oracles::random_matrix(15, 15, 1234);
  const LinearOperator a = dense_operator(am);
  const ComplexVector b = oracles::random_vector(15, 4321);
  const ArnoldiDecomposition d = arnoldi_process(a, b, 10);
  const SvdResult s = svd_small(am);
  double hprod = 1.0, sprod = 1.0;
  for (std::size_t k = 0; k < d.steps && !(d.breakdown && *d.breakdown <= k); ++k) {
    hprod *= std::abs(d.hessenberg(k + 1, k));
    sprod *= s.sigma[k];
    CHECK(hprod <= sprod * (1.0 + 1e-8));
  }
}

TEST_CASE("shifted decomposition satisfies the modified relation") {
  const ComplexMatrix am = oracles::random_matrix(12, 12, 88);
  const LinearOperator a = dense_operator(am);
  const ComplexVector b = oracles::random_vector(12, 89);
  for (std::size_t shift : {2, 3}) {
    const ArnoldiDecomposition d = arnoldi_process(a, b, 4, shift);
    REQUIRE(d.steps == 4);
    REQUIRE(d.basis.cols() == 4 + shift);
    REQUIRE(d.hessenberg.rows() == 4 + shift);
    REQUIRE(d.hessenberg.cols() == 4);

    // full basis starts at b, solution basis starts at A^{shift-1} b
    CHECK(norm(subtract(d.basis.column(0), scaled(b, 1.0 / norm(b)))) <= 1e-13);
    ComplexVector lead = b;
    for (std::size_t t = 0; t + 1 < shift; ++t) lead = a.apply(lead);
    const ComplexVector v1 = d.solution_basis.column(0);
    CHECK(norm(subtract(v1, scaled(lead, 1.0 / norm(lead)))) <= 1e-11);

    // entries below the shift-th subdiagonal vanish exactly
    for (std::size_t j = 0; j < d.hessenberg.cols(); ++j)
      for (std::size_t i = j + shift + 1; i < d.hessenberg.rows(); ++i)
        CHECK(std::abs(d.hessenberg(i, j)) == 0.0);
    for (std::size_t j = 0; j < d.hessenberg.cols(); ++j)
      CHECK(d.hessenberg(j + shift, j).imag() == 0.0);

    const DecompositionCheck c = validate_decomposition(a, d);
    CHECK(c.relation_residual <= 1e-10 * frobenius_norm(am));
    CHECK(c.orthogonality_error <= 1e-11);

    // solution basis columns are orthonormal
    const ComplexMatrix g = matmul(adjoint(d.solution_basis), d.solution_basis);
    CHECK(oracles::matrix_distance(g, ComplexMatrix::identity(4)) <= 1e-11);
  }
}

TEST_CASE("membership distance separates span members from orthogonal vectors") {
  const ComplexMatrix am = oracles::random_matrix(10, 10, 55);
  const LinearOperator a = dense_operator(am);
  const ComplexVector b = oracles::random_vector(10, 56);
  const ArnoldiDecomposition d = arnoldi_process(a, b, 4);

  CHECK(krylov_membership(d, d.basis.column(2)) <= 1e-12);

  ComplexVector x = oracles::random_vector(10, 57);
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t j = 0; j < d.basis.cols(); ++j) {
      const Complex h = dot(d.basis.column(j), x);
      axpy(-h, d.basis.column(j), x);
    }
  CHECK(krylov_membership(d, x) == Catch::Approx(1.0).margin(1e-12));

  CHECK(krylov_membership(d, ComplexVector(10, Complex(0.0))) == 0.0);
}

TEST_CASE("truncation keeps the leading decomposition") {
  const ComplexMatrix am = oracles::random_matrix(14, 14, 90);
  const LinearOperator a = dense_operator(am);
  const ArnoldiDecomposition d = arnoldi_process(a, oracles::random_vector(14, 91), 8);
  const ArnoldiDecomposition t = d.truncated(5);
  CHECK(t.steps == 5);
  CHECK(t.basis.cols() == 6);
  const DecompositionCheck c = validate_decomposition(a, t);
  CHECK(c.relation_residual <= 1e-11 * frobenius_norm(am));
}

TEST_CASE("preconditions are enforced") {
  const LinearOperator a = dense_operator(oracles::random_matrix(6, 6, 3));
  CHECK_THROWS_AS(arnoldi_process(a, ComplexVector(6, Complex(0.0)), 3), std::invalid_argument);
  CHECK_THROWS_AS(arnoldi_process(a, oracles::random_vector(6, 2), 6, 1), std::invalid_argument);
  CHECK_THROWS_AS(arnoldi_process(a, oracles::random_vector(6, 2), 3, 0), std::invalid_argument);
}
