#include "noisydialog/gf2m.hpp"

#include <array>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace nd {
namespace {

using u128 = unsigned __int128;

int degree(u128 p) {
  int d = -1;
  while (p) {
    ++d;
    p >>= 1;
  }
  return d;
}

// Multiplication in GF(2)[x] mod (x^m + low), valid whether or not the
// modulus is irreducible.
uint64_t ring_mul(int m, uint64_t low, uint64_t a, uint64_t b) {
  u128 acc = 0;
  u128 aa = a;
  while (b) {
    if (b & 1u) acc ^= aa;
    aa <<= 1;
    b >>= 1;
  }
  for (int i = 2 * m - 2; i >= m; --i) {
    if ((acc >> i) & 1u) {
      acc ^= u128(1) << i;
      acc ^= u128(low) << (i - m);
    }
  }
  uint64_t mask = (m == 64) ? ~0ull : ((1ull << m) - 1);
  return static_cast<uint64_t>(acc) & mask;
}

u128 poly_mod(u128 a, u128 b) {
  int db = degree(b);
  for (int da = degree(a); da >= db; da = degree(a)) {
    a ^= b << (da - db);
  }
  return a;
}

u128 poly_gcd(u128 a, u128 b) {
  while (b != 0) {
    u128 r = poly_mod(a, b);
    a = b;
    b = r;
  }
  return a;
}

std::vector<int> prime_divisors(int m) {
  std::vector<int> out;
  int n = m;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace

bool Gf2m::is_irreducible(int m, uint64_t low) {
  if (m < 1) return false;
  if ((low & 1u) == 0) return false;  // divisible by x
  // Rabin's test: x^(2^m) == x mod f, and for every prime p | m,
  // gcd(f, x^(2^(m/p)) - x) == 1.
  const u128 f = (u128(1) << m) ^ u128(low);
  uint64_t e = 2;  // the polynomial x
  std::vector<uint64_t> checkpoints;
  std::vector<int> primes = prime_divisors(m);
  std::vector<int> stops;
  for (int p : primes) stops.push_back(m / p);
  for (int i = 1; i <= m; ++i) {
    e = ring_mul(m, low, e, e);
    for (size_t s = 0; s < stops.size(); ++s) {
      if (stops[s] == i) checkpoints.push_back(e);
    }
  }
  if (e != 2) return false;
  for (uint64_t h : checkpoints) {
    u128 g = u128(h) ^ u128(2);
    if (g == 0) return false;
    if (poly_gcd(f, g) != 1) return false;
  }
  return true;
}

uint64_t Gf2m::min_irreducible_low(int m) {
  if (m < 2 || m > 64) {
    throw std::invalid_argument("GF(2^m) supported for 2 <= m <= 64");
  }
  static std::array<uint64_t, 65> cache{};
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (cache[static_cast<size_t>(m)] != 0) return cache[static_cast<size_t>(m)];
  for (uint64_t low = 1;; low += 2) {
    if (__builtin_popcountll(low) % 2 != 0) continue;  // f(1) must be 1
    if (is_irreducible(m, low)) {
      cache[static_cast<size_t>(m)] = low;
      return low;
    }
  }
}

Gf2m::Gf2m(int m) : m_(m) {
  poly_low_ = min_irreducible_low(m);
  mask_ = (m == 64) ? ~0ull : ((1ull << m) - 1);
}

uint64_t Gf2m::mul(uint64_t a, uint64_t b) const {
  return ring_mul(m_, poly_low_, a & mask_, b & mask_);
}

uint64_t Gf2m::pow(uint64_t a, uint64_t e) const {
  uint64_t base = a & mask_;
  uint64_t acc = 1;
  while (e) {
    if (e & 1u) acc = mul(acc, base);
    base = mul(base, base);
    e >>= 1;
  }
  return acc;
}

uint64_t Gf2m::inv(uint64_t a) const {
  if ((a & mask_) == 0) throw std::domain_error("inverse of zero in GF(2^m)");
  uint64_t e = (m_ == 64) ? ~0ull - 1 : (1ull << m_) - 2;
  return pow(a, e);
}

}  // namespace nd
