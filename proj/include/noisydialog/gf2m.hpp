#pragma once

#include <cstdint>

namespace nd {

// Arithmetic in GF(2^m) for 2 <= m <= 64. Each field uses the canonical
// minimal irreducible polynomial of degree m: the irreducible polynomial
// whose integer encoding (coefficient bits) is smallest. The polynomial is
// found once per m by deterministic search and cached, so every build agrees
// on the field without an external table.
class Gf2m {
 public:
  explicit Gf2m(int m);

  int m() const { return m_; }
  // Low coefficients of the modulus: the polynomial minus its x^m term.
  uint64_t modulus_low() const { return poly_low_; }
  uint64_t mask() const { return mask_; }

  uint64_t add(uint64_t a, uint64_t b) const { return a ^ b; }
  uint64_t mul(uint64_t a, uint64_t b) const;
  uint64_t pow(uint64_t a, uint64_t e) const;
  uint64_t inv(uint64_t a) const;

  // True if x^m + (low coefficients) is irreducible over GF(2).
  static bool is_irreducible(int m, uint64_t low);
  static uint64_t min_irreducible_low(int m);

 private:
  int m_ = 0;
  uint64_t poly_low_ = 0;
  uint64_t mask_ = 0;
};

}  // namespace nd
