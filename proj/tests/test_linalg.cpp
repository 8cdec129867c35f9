#include <krylovreg/linalg.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace krylovreg;

namespace {

ComplexMatrix diag_matrix(const std::vector<double>& d) {
  ComplexMatrix a(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = d[i];
  return a;
}

double svd_reconstruction_error(const ComplexMatrix& b, const SvdResult& s) {
  ComplexMatrix us = s.u;
  for (std::size_t j = 0; j < us.cols(); ++j)
    for (std::size_t i = 0; i < us.rows(); ++i) us(i, j) *= s.sigma[j];
  return oracles::matrix_distance(b, matmul(us, adjoint(s.w)));
}

double orthonormality_error(const ComplexMatrix& q) {
  const ComplexMatrix g = matmul(adjoint(q), q);
  return oracles::matrix_distance(g, ComplexMatrix::identity(q.cols()));
}

}  // namespace

TEST_CASE("svd of a diagonal matrix reorders the entries") {
  const SvdResult s = svd_small(diag_matrix({1.0, 3.0, 2.0}));
  REQUIRE(s.sigma.size() == 3);
  CHECK(s.sigma[0] == Catch::Approx(3.0).margin(1e-14));
  CHECK(s.sigma[1] == Catch::Approx(2.0).margin(1e-14));
  CHECK(s.sigma[2] == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("svd of the identity") {
  const SvdResult s = svd_small(ComplexMatrix::identity(5));
  for (double sv : s.sigma) CHECK(sv == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("svd squared singular values match the Hermitian eigensolver on B*B") {
  const ComplexMatrix b = oracles::random_matrix(7, 4, 99);
  const SvdResult s = svd_small(b);
  const EigResult e = hermitian_eig(matmul(adjoint(b), b));
  REQUIRE(e.lambda.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(s.sigma[i] * s.sigma[i] == Catch::Approx(e.lambda[i]).margin(1e-10));
}

TEST_CASE("svd reconstruction and orthonormality") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const ComplexMatrix b = oracles::random_matrix(9, 6, seed);
    const SvdResult s = svd_small(b);
    CHECK(svd_reconstruction_error(b, s) <= 1e-12 * frobenius_norm(b));
    CHECK(orthonormality_error(s.u) <= 1e-12);
    CHECK(orthonormality_error(s.w) <= 1e-12);
    for (std::size_t i = 0; i + 1 < s.sigma.size(); ++i) CHECK(s.sigma[i] >= s.sigma[i + 1]);
  }
  // wide input goes through the transposed path
  const ComplexMatrix b = oracles::random_matrix(4, 7, 17);
  const SvdResult s = svd_small(b);
  CHECK(svd_reconstruction_error(b, s) <= 1e-12 * frobenius_norm(b));
}

TEST_CASE("singular values are invariant under unitary factors") {
  const ComplexMatrix b = oracles::random_matrix(6, 6, 4);
  const SvdResult sb = svd_small(b);
  const ComplexMatrix q1 = svd_small(oracles::random_matrix(6, 6, 5)).u;
  const ComplexMatrix q2 = svd_small(oracles::random_matrix(6, 6, 6)).u;
  const SvdResult st = svd_small(matmul(q1, matmul(b, q2)));
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(st.sigma[i] == Catch::Approx(sb.sigma[i]).margin(1e-10 * sb.sigma[0]));
}

TEST_CASE("svd handles an exactly singular matrix") {
  const SvdResult s = svd_small(diag_matrix({2.0, 0.0, 1.0}));
  CHECK(s.sigma[2] == 0.0);
  CHECK(orthonormality_error(s.u) <= 1e-12);
}

TEST_CASE("hermitian eigenvalues of a diagonal matrix") {
  const EigResult e = hermitian_eig(diag_matrix({-1.0, 0.0, 2.0}));
  CHECK(e.lambda[0] == Catch::Approx(2.0).margin(1e-14));
  CHECK(e.lambda[1] == Catch::Approx(0.0).margin(1e-14));
  CHECK(e.lambda[2] == Catch::Approx(-1.0).margin(1e-14));
}

TEST_CASE("eigenvalues of the Hermitian part of the downshift matrix") {
  const std::size_t m = 20;
  const ComplexMatrix a = oracles::downshift_matrix(m);
  ComplexMatrix h(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  const EigResult e = hermitian_eig(h);
  const double pi = 3.14159265358979323846;
  for (std::size_t j = 0; j < m; ++j) {
    const double expected = std::cos(pi * static_cast<double>(j + 1) / static_cast<double>(m + 1));
    CHECK(e.lambda[j] == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("hermitian eig trace identities and reconstruction") {
  const ComplexMatrix b = oracles::random_hermitian(6, 123);
  const EigResult e = hermitian_eig(b);
  double sum = 0.0, sumsq = 0.0;
  for (double l : e.lambda) {
    sum += l;
    sumsq += l * l;
  }
  CHECK(sum == Catch::Approx(trace(b).real()).margin(1e-10));
  const double f = frobenius_norm(b);
  CHECK(sumsq == Catch::Approx(f * f).margin(1e-10));

  ComplexMatrix ul = e.u;
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = 0; i < 6; ++i) ul(i, j) *= e.lambda[j];
  CHECK(oracles::matrix_distance(b, matmul(ul, adjoint(e.u))) <= 1e-11 * f);
}

TEST_CASE("hermitian eig rejects non-Hermitian input") {
  ComplexMatrix b = oracles::random_matrix(4, 4, 77);
  REQUIRE_THROWS_AS(hermitian_eig(b), std::invalid_argument);
}

TEST_CASE("hessenberg least squares, tiny cases") {
  {
    ComplexMatrix h(2, 1);
    h(0, 0) = 1.0;
    const auto r = hessenberg_lstsq(h, 1.0);
    REQUIRE(r.y.size() == 1);
    CHECK(std::abs(r.y[0] - Complex(1.0)) < 1e-14);
    CHECK(r.resnorm < 1e-14);
  }
  {
    ComplexMatrix h(2, 1);
    h(1, 0) = 1.0;
    const auto r = hessenberg_lstsq(h, 1.0);
    CHECK(std::abs(r.y[0]) < 1e-14);
    CHECK(r.resnorm == Catch::Approx(1.0).margin(1e-14));
  }
}

TEST_CASE("hessenberg least squares matches the normal-equations oracle") {
  const ComplexMatrix h = oracles::random_upper_hessenberg(6, 5, 301);
  const double beta = 2.25;
  const auto r = hessenberg_lstsq(h, beta);
  const ComplexVector ref = oracles::normal_equations_lstsq(h, beta);
  CHECK(norm(subtract(r.y, ref)) <= 1e-10 * norm(ref));
  CHECK_FALSE(r.rank_deficient);
  CHECK(r.resnorm <= beta);
}

TEST_CASE("residual never exceeds the right-hand side norm") {
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    const ComplexMatrix h = oracles::random_upper_hessenberg(8, 7, seed);
    const auto r = hessenberg_lstsq(h, 3.0);
    CHECK(r.resnorm <= 3.0 + 1e-12);
  }
}

TEST_CASE("exactly rank-deficient system returns flagged minimum-norm solution") {
  ComplexMatrix h(3, 2);
  h(0, 0) = 1.0;
  h(0, 1) = 1.0;  // second column identical; zero subdiagonal
  const auto r = hessenberg_lstsq(h, 2.0);
  CHECK(r.rank_deficient);
  CHECK(std::abs(r.y[0] - Complex(1.0)) < 1e-12);
  CHECK(std::abs(r.y[1] - Complex(1.0)) < 1e-12);
  CHECK(r.resnorm < 1e-12);
}
