#pragma once

#include <cstdint>

#include "noisydialog/bits.hpp"
#include "noisydialog/gf2m.hpp"

namespace nd {

struct HashParams {
  int t = 0;   // max input bits
  int o = 0;   // output bits
  int sd() const { return 2 * o; }
};

// Polynomial-evaluation hash over GF(2^o): the input is encoded as a 32-bit
// length prefix plus payload zero-padded to t bits, split into o-bit chunks
// c_0..c_{n-1}, and mapped to sum(c_i * alpha^(i+1)) + beta for seed
// (alpha, beta). Distinct inputs collide on at most ceil((32+t)/o) / 2^o of
// the seeds.
Bits pairwise_hash(const Bits& x, const Bits& seed, const HashParams& params);

// Random-access delta-biased bit string: seed (alpha, beta) in GF(2^m)^2,
// bit i = <alpha^i, beta> over GF(2). Nothing longer than the 2m-bit seed is
// ever materialized unless extend_all is called.
struct BiasExtender {
  size_t target_len = 0;       // ell
  int neg_log2_delta = 0;      // delta = 2^-neg_log2_delta
  int m = 0;                   // field size; seed is 2m bits
  int seed_len() const { return 2 * m; }
};

BiasExtender make_extender(size_t ell, int neg_log2_delta);

uint8_t extend_bit(const Bits& seed, size_t index, const BiasExtender& cfg);
Bits extend_all(const Bits& seed, const BiasExtender& cfg);

// Two-layer per-iteration hash: an outer wide hash keyed by this iteration's
// chunk of the block-level extended randomness, compressed by an inner hash
// keyed by the per-iteration exchanged seed.
Bits small_hash(const Bits& x, const Bits& r_iter, const Bits& r_block_chunk,
                const HashParams& outer, const HashParams& inner);

// Chained block-boundary hash (single wide layer).
Bits big_hash(const Bits& payload, const Bits& r_block_b, const HashParams& params);

}  // namespace nd
