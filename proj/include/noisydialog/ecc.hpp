#pragma once

#include <cstdint>
#include <vector>

#include "noisydialog/bits.hpp"

namespace nd {

// Systematic shortened Reed-Solomon code over GF(2^symbol_bits) protecting
// the block-level randomness exchanges. With parity = 4*guard + 1 symbols the
// code corrects any 2*guard symbol errors, so in particular any 2*guard bit
// flips on the wire.
struct EccConfig {
  int msg_len = 0;      // message bits
  int guard = 0;        // tolerated flip budget parameter (I_block)
  int symbol_bits = 0;  // m
  int msg_symbols = 0;  // ceil(msg_len / m)
  int parity_symbols = 0;
  int total_symbols = 0;
  int block_len = 0;    // codeword bits on the wire
};

// Picks the smallest symbol size whose field fits the codeword and checks the
// rate stays within 3x of (msg_len + guard * symbol_bits).
EccConfig make_ecc_config(int msg_len, int guard);

Bits ecc_encode(const Bits& msg, const EccConfig& cfg);

// Best effort: exact within the correction radius, otherwise returns the
// systematic symbols as received (never fails).
Bits ecc_decode(const Bits& received, const EccConfig& cfg);

}  // namespace nd
