#include <krylovreg/dft.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace krylovreg;

TEST_CASE("forward transform of e_1 is the flat vector") {
  const ComplexVector v = unit_vector(4, 0);
  const ComplexVector out = unitary_dft(v, DftDirection::forward);
  for (const Complex& z : out) {
    REQUIRE(std::abs(z - Complex(0.5)) < 1e-15);
  }
}

TEST_CASE("unitary transform preserves the Euclidean norm") {
  for (std::size_t m : {2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14, 15, 16, 17,
                        18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33,
                        34, 35, 36, 37, 38, 39, 40, 41, 42, 43, 44, 45, 46, 47, 48, 49,
                        50, 51, 52, 53, 54, 55, 56, 57, 58, 59, 60, 61, 62, 63, 64, 100,
                        1000}) {
    const ComplexVector v = oracles::random_vector(m, 1000 + m);
    const double nv = norm(v);
    for (auto dir : {DftDirection::forward, DftDirection::inverse}) {
      const ComplexVector out = unitary_dft(v, dir);
      REQUIRE(std::abs(norm(out) - nv) <= 1e-13 * nv);
    }
  }
}

TEST_CASE("inverse undoes forward") {
  for (std::size_t m : {5, 8, 100}) {
    const ComplexVector v = oracles::random_vector(m, 7 * m + 1);
    const ComplexVector back = unitary_dft(unitary_dft(v, DftDirection::forward), DftDirection::inverse);
    REQUIRE(norm(subtract(back, v)) <= 1e-13 * norm(v));
  }
}

TEST_CASE("transforms agree with the quadratic-cost evaluation") {
  for (std::size_t m : {3, 5, 8, 13, 16, 200}) {
    const ComplexVector v = oracles::random_vector(m, 31 * m);
    const ComplexVector fwd = unitary_dft(v, DftDirection::forward);
    const ComplexVector ref = oracles::naive_unitary_dft(v, +1);
    REQUIRE(norm(subtract(fwd, ref)) <= 1e-12 * norm(v));
    const ComplexVector inv = unitary_dft(v, DftDirection::inverse);
    const ComplexVector ref2 = oracles::naive_unitary_dft(v, -1);
    REQUIRE(norm(subtract(inv, ref2)) <= 1e-12 * norm(v));
  }
}
