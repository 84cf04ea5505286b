#include "noisydialog/ecc.hpp"

#include <stdexcept>

#include "noisydialog/gf2m.hpp"

namespace nd {
namespace {

// Primitive element of GF(2^m): smallest g whose order is 2^m - 1.
uint64_t find_primitive(const Gf2m& field) {
  uint64_t order = field.mask();  // 2^m - 1
  std::vector<uint64_t> prime_factors;
  uint64_t n = order;
  for (uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      prime_factors.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) prime_factors.push_back(n);
  for (uint64_t g = 2;; ++g) {
    bool primitive = true;
    for (uint64_t p : prime_factors) {
      if (field.pow(g, order / p) == 1) {
        primitive = false;
        break;
      }
    }
    if (primitive) return g;
  }
}

std::vector<uint64_t> symbols_from_bits(const Bits& bits, int m, int count) {
  std::vector<uint64_t> out(static_cast<size_t>(count), 0);
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) {
      size_t sym = i / static_cast<size_t>(m);
      int bit = m - 1 - static_cast<int>(i % static_cast<size_t>(m));
      out[sym] |= 1ull << bit;
    }
  }
  return out;
}

void bits_from_symbols(const std::vector<uint64_t>& syms, int m, Bits& out) {
  for (uint64_t s : syms) append_uint(out, s, m);
}

// Remainder of poly(x) * x^parity divided by the generator polynomial.
// Polynomials are coefficient vectors, lowest degree first.
std::vector<uint64_t> generator_poly(const Gf2m& field, uint64_t prim, int parity) {
  std::vector<uint64_t> g{1};
  uint64_t root = 1;
  for (int i = 1; i <= parity; ++i) {
    root = field.mul(root, prim);  // prim^i
    std::vector<uint64_t> next(g.size() + 1, 0);
    for (size_t j = 0; j < g.size(); ++j) {
      next[j + 1] ^= g[j];
      next[j] ^= field.mul(g[j], root);
    }
    g = next;
  }
  return g;
}

}  // namespace

EccConfig make_ecc_config(int msg_len, int guard) {
  if (msg_len < 1 || guard < 1) throw std::invalid_argument("make_ecc_config domain");
  EccConfig cfg;
  cfg.msg_len = msg_len;
  cfg.guard = guard;
  cfg.parity_symbols = 4 * guard + 1;
  for (int m = 2; m <= 16; ++m) {
    int msg_symbols = (msg_len + m - 1) / m;
    int total = msg_symbols + cfg.parity_symbols;
    if (total <= (1 << m) - 1) {
      cfg.symbol_bits = m;
      cfg.msg_symbols = msg_symbols;
      cfg.total_symbols = total;
      cfg.block_len = total * m;
      break;
    }
  }
  if (cfg.symbol_bits == 0) throw std::invalid_argument("message too long for ECC");
  if (cfg.block_len > 3 * (msg_len + guard * cfg.symbol_bits)) {
    throw std::logic_error("ECC rate bound exceeded");
  }
  return cfg;
}

Bits ecc_encode(const Bits& msg, const EccConfig& cfg) {
  if (static_cast<int>(msg.size()) != cfg.msg_len) {
    throw std::invalid_argument("ecc_encode message length mismatch");
  }
  Gf2m field(cfg.symbol_bits);
  uint64_t prim = find_primitive(field);
  std::vector<uint64_t> g = generator_poly(field, prim, cfg.parity_symbols);

  std::vector<uint64_t> msg_syms = symbols_from_bits(msg, cfg.symbol_bits, cfg.msg_symbols);
  // Codeword polynomial c(x) = m(x)*x^parity + (m(x)*x^parity mod g(x));
  // message symbol i sits at degree parity + (msg_symbols-1-i).
  std::vector<uint64_t> rem(static_cast<size_t>(cfg.parity_symbols), 0);
  for (int i = 0; i < cfg.msg_symbols; ++i) {
    // Synthetic division, feeding message symbols from the highest degree.
    uint64_t feedback = msg_syms[static_cast<size_t>(i)] ^ rem.back();
    rem.pop_back();
    rem.insert(rem.begin(), 0);
    if (feedback != 0) {
      for (int j = 0; j < cfg.parity_symbols; ++j) {
        rem[static_cast<size_t>(j)] ^= field.mul(feedback, g[static_cast<size_t>(j)]);
      }
    }
  }
  // Wire layout: message symbols first (systematic), then parity symbols from
  // highest degree down.
  std::vector<uint64_t> wire = msg_syms;
  for (int j = cfg.parity_symbols - 1; j >= 0; --j) wire.push_back(rem[static_cast<size_t>(j)]);
  Bits out;
  out.reserve(static_cast<size_t>(cfg.block_len));
  bits_from_symbols(wire, cfg.symbol_bits, out);
  return out;
}

Bits ecc_decode(const Bits& received, const EccConfig& cfg) {
  if (static_cast<int>(received.size()) != cfg.block_len) {
    throw std::invalid_argument("ecc_decode length mismatch");
  }
  Gf2m field(cfg.symbol_bits);
  uint64_t prim = find_primitive(field);

  std::vector<uint64_t> wire = symbols_from_bits(received, cfg.symbol_bits, cfg.total_symbols);
  // Codeword coefficients: degree total-1-i for wire symbol i.
  std::vector<uint64_t> c(wire.rbegin(), wire.rend());

  auto extract_msg = [&](const std::vector<uint64_t>& coeffs) {
    std::vector<uint64_t> msg_syms;
    msg_syms.reserve(static_cast<size_t>(cfg.msg_symbols));
    for (int i = 0; i < cfg.msg_symbols; ++i) {
      msg_syms.push_back(coeffs[static_cast<size_t>(cfg.total_symbols - 1 - i)]);
    }
    Bits all;
    bits_from_symbols(msg_syms, cfg.symbol_bits, all);
    all.resize(static_cast<size_t>(cfg.msg_len));
    return all;
  };

  // Syndromes S_j = c(prim^j), j = 1..parity.
  int parity = cfg.parity_symbols;
  std::vector<uint64_t> syn(static_cast<size_t>(parity), 0);
  bool clean = true;
  uint64_t point = 1;
  for (int j = 0; j < parity; ++j) {
    point = field.mul(point, prim);
    uint64_t acc = 0;
    for (int i = cfg.total_symbols - 1; i >= 0; --i) {
      acc = field.mul(acc, point) ^ c[static_cast<size_t>(i)];
    }
    syn[static_cast<size_t>(j)] = acc;
    if (acc != 0) clean = false;
  }
  if (clean) return extract_msg(c);

  // Berlekamp-Massey for the error locator polynomial.
  std::vector<uint64_t> lambda{1};
  std::vector<uint64_t> prev{1};
  uint64_t prev_disc = 1;
  int l = 0;
  int shift = 1;
  for (int n = 0; n < parity; ++n) {
    uint64_t disc = syn[static_cast<size_t>(n)];
    for (int i = 1; i <= l && i < static_cast<int>(lambda.size()); ++i) {
      disc ^= field.mul(lambda[static_cast<size_t>(i)], syn[static_cast<size_t>(n - i)]);
    }
    if (disc == 0) {
      ++shift;
      continue;
    }
    std::vector<uint64_t> next = lambda;
    uint64_t coef = field.mul(disc, field.inv(prev_disc));
    if (next.size() < prev.size() + static_cast<size_t>(shift)) {
      next.resize(prev.size() + static_cast<size_t>(shift), 0);
    }
    for (size_t i = 0; i < prev.size(); ++i) {
      next[i + static_cast<size_t>(shift)] ^= field.mul(coef, prev[i]);
    }
    if (2 * l <= n) {
      prev = lambda;
      prev_disc = disc;
      l = n + 1 - l;
      shift = 1;
    } else {
      ++shift;
    }
    lambda = next;
  }
  int deg = static_cast<int>(lambda.size()) - 1;
  while (deg > 0 && lambda[static_cast<size_t>(deg)] == 0) --deg;
  if (deg > 2 * cfg.guard || deg != l) return extract_msg(c);

  // Chien search over the used positions.
  std::vector<int> error_pos;
  uint64_t prim_inv = field.inv(prim);
  for (int i = 0; i < cfg.total_symbols && static_cast<int>(error_pos.size()) <= deg; ++i) {
    uint64_t x = field.pow(prim_inv, static_cast<uint64_t>(i));
    uint64_t acc = 0;
    for (int j = deg; j >= 0; --j) {
      acc = field.mul(acc, x) ^ lambda[static_cast<size_t>(j)];
    }
    if (acc == 0) error_pos.push_back(i);
  }
  if (static_cast<int>(error_pos.size()) != deg) return extract_msg(c);

  // Forney: omega(x) = S(x) * lambda(x) mod x^parity, with S(x) built from
  // syndromes S_1.. as coefficients of x^0...
  std::vector<uint64_t> omega(static_cast<size_t>(parity), 0);
  for (int i = 0; i < parity; ++i) {
    for (size_t j = 0; j < lambda.size(); ++j) {
      if (static_cast<size_t>(i) + j < static_cast<size_t>(parity)) {
        omega[static_cast<size_t>(i) + j] ^= field.mul(syn[static_cast<size_t>(i)], lambda[j]);
      }
    }
  }
  for (int pos : error_pos) {
    uint64_t x_inv = field.pow(prim_inv, static_cast<uint64_t>(pos));
    uint64_t num = 0;
    for (int j = parity - 1; j >= 0; --j) {
      num = field.mul(num, x_inv) ^ omega[static_cast<size_t>(j)];
    }
    // lambda'(x) in characteristic 2 keeps only odd-degree terms.
    uint64_t den = 0;
    for (int j = 1; j <= deg; j += 2) {
      uint64_t term = lambda[static_cast<size_t>(j)];
      den ^= field.mul(term, field.pow(x_inv, static_cast<uint64_t>(j - 1)));
    }
    if (den == 0) return extract_msg(c);
    uint64_t magnitude = field.mul(num, field.inv(den));
    c[static_cast<size_t>(pos)] ^= magnitude;
  }
  return extract_msg(c);
}

}  // namespace nd
