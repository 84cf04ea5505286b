#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <random>

#include "noisydialog/gf2m.hpp"

using nd::Gf2m;

TEST_CASE("canonical moduli for small fields") {
  // x^2+x+1, x^3+x+1, x^4+x+1 are the smallest-encoding irreducibles.
  CHECK(Gf2m::min_irreducible_low(2) == 0b11);
  CHECK(Gf2m::min_irreducible_low(3) == 0b011);
  CHECK(Gf2m::min_irreducible_low(4) == 0b0011);

  CHECK(Gf2m::is_irreducible(2, 0b11));
  CHECK_FALSE(Gf2m::is_irreducible(2, 0b01));  // x^2+1 = (x+1)^2
  CHECK_FALSE(Gf2m::is_irreducible(2, 0b10));  // x^2+x = x(x+1)
}

TEST_CASE("min_irreducible_low is the minimum") {
  for (int m = 2; m <= 12; ++m) {
    uint64_t low = Gf2m::min_irreducible_low(m);
    CHECK(Gf2m::is_irreducible(m, low));
    for (uint64_t c = 0; c < low; ++c) CHECK_FALSE(Gf2m::is_irreducible(m, c));
  }
}

TEST_CASE("field axioms hold exhaustively in GF(8) and GF(16)") {
  for (int m : {3, 4}) {
    Gf2m f(m);
    uint64_t n = uint64_t{1} << m;
    for (uint64_t a = 0; a < n; ++a) {
      CHECK(f.mul(a, 1) == a);
      CHECK(f.mul(a, 0) == 0);
      for (uint64_t b = 0; b < n; ++b) {
        CHECK(f.mul(a, b) == f.mul(b, a));
        for (uint64_t c = 0; c < n; ++c) {
          CHECK(f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c));
          CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
        }
      }
    }
  }
}

TEST_CASE("inverses and the multiplicative group order") {
  std::mt19937_64 rng(11);
  for (int m : {2, 5, 8, 14, 31, 48, 64}) {
    Gf2m f(m);
    for (int trial = 0; trial < 40; ++trial) {
      uint64_t a = rng() & f.mask();
      if (a == 0) continue;
      CHECK(f.mul(a, f.inv(a)) == 1);
      // Lagrange: a^(2^m - 1) = 1. The exponent overflows at m = 64, where
      // 2^64 - 1 is exactly the all-ones mask.
      uint64_t group = m == 64 ? ~uint64_t{0} : (uint64_t{1} << m) - 1;
      CHECK(f.pow(a, group) == 1);
      CHECK(f.pow(a, group - 1) == f.inv(a));
    }
  }
}

TEST_CASE("pow matches repeated multiplication") {
  Gf2m f(14);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    uint64_t a = rng() & f.mask();
    uint64_t acc = 1;
    for (uint64_t e = 0; e < 16; ++e) {
      CHECK(f.pow(a, e) == acc);
      acc = f.mul(acc, a);
    }
  }
}

TEST_CASE("modulus is reported consistently") {
  for (int m : {2, 8, 24, 64}) {
    Gf2m f(m);
    CHECK(f.m() == m);
    CHECK(f.modulus_low() == Gf2m::min_irreducible_low(m));
    CHECK(f.mask() == (m == 64 ? ~uint64_t{0} : (uint64_t{1} << m) - 1));
    CHECK(Gf2m::is_irreducible(m, f.modulus_low()));
  }
}
