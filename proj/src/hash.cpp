#include "noisydialog/hash.hpp"

#include <algorithm>
#include <stdexcept>

namespace nd {
namespace {

int ceil_log2(uint64_t x) {
  int bits = 0;
  uint64_t v = 1;
  while (v < x) {
    v <<= 1;
    ++bits;
  }
  return bits;
}

}  // namespace

Bits pairwise_hash(const Bits& x, const Bits& seed, const HashParams& params) {
  if (static_cast<int>(x.size()) > params.t) {
    throw std::invalid_argument("pairwise_hash input longer than t");
  }
  if (static_cast<int>(seed.size()) != params.sd()) {
    throw std::invalid_argument("pairwise_hash seed length mismatch");
  }
  Bits encoded;
  encoded.reserve(32 + static_cast<size_t>(params.t));
  append_uint(encoded, x.size(), 32);
  append_bits(encoded, x);
  encoded.resize(32 + static_cast<size_t>(params.t), 0);

  Gf2m field(params.o);
  uint64_t alpha = read_uint(seed, 0, params.o);
  uint64_t beta = read_uint(seed, static_cast<size_t>(params.o), params.o);

  uint64_t acc = 0;
  uint64_t apow = 1;
  size_t pos = 0;
  while (pos < encoded.size()) {
    int take = static_cast<int>(std::min(encoded.size() - pos, static_cast<size_t>(params.o)));
    uint64_t chunk = read_uint(encoded, pos, take);
    // Short tail chunks are left-aligned no differently than zero padding.
    chunk <<= (params.o - take);
    pos += static_cast<size_t>(take);
    apow = field.mul(apow, alpha);
    acc ^= field.mul(chunk, apow);
  }
  acc ^= beta;
  return uint_to_bits(acc, params.o);
}

BiasExtender make_extender(size_t ell, int neg_log2_delta) {
  if (ell == 0 || neg_log2_delta < 1) {
    throw std::invalid_argument("make_extender domain");
  }
  BiasExtender cfg;
  cfg.target_len = ell;
  cfg.neg_log2_delta = neg_log2_delta;
  cfg.m = ceil_log2(ell) + neg_log2_delta + 1;
  if (cfg.m < 2) cfg.m = 2;
  if (cfg.m > 64) throw std::invalid_argument("extender field exceeds 64 bits");
  return cfg;
}

uint8_t extend_bit(const Bits& seed, size_t index, const BiasExtender& cfg) {
  if (index >= cfg.target_len) throw std::out_of_range("extend_bit index");
  if (static_cast<int>(seed.size()) != cfg.seed_len()) {
    throw std::invalid_argument("extend_bit seed length mismatch");
  }
  Gf2m field(cfg.m);
  uint64_t alpha = read_uint(seed, 0, cfg.m);
  uint64_t beta = read_uint(seed, static_cast<size_t>(cfg.m), cfg.m);
  uint64_t prod = field.pow(alpha, index) & beta;
  return static_cast<uint8_t>(__builtin_popcountll(prod) & 1);
}

Bits extend_all(const Bits& seed, const BiasExtender& cfg) {
  if (static_cast<int>(seed.size()) != cfg.seed_len()) {
    throw std::invalid_argument("extend_all seed length mismatch");
  }
  Gf2m field(cfg.m);
  uint64_t alpha = read_uint(seed, 0, cfg.m);
  uint64_t beta = read_uint(seed, static_cast<size_t>(cfg.m), cfg.m);
  Bits out;
  out.reserve(cfg.target_len);
  uint64_t apow = 1;  // alpha^0
  for (size_t i = 0; i < cfg.target_len; ++i) {
    out.push_back(static_cast<uint8_t>(__builtin_popcountll(apow & beta) & 1));
    apow = field.mul(apow, alpha);
  }
  return out;
}

Bits small_hash(const Bits& x, const Bits& r_iter, const Bits& r_block_chunk,
                const HashParams& outer, const HashParams& inner) {
  Bits mid = pairwise_hash(x, r_block_chunk, outer);
  return pairwise_hash(mid, r_iter, inner);
}

Bits big_hash(const Bits& payload, const Bits& r_block_b, const HashParams& params) {
  return pairwise_hash(payload, r_block_b, params);
}

}  // namespace nd
