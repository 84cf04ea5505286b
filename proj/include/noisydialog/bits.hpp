#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace nd {

// Bit strings as vectors of 0/1 bytes. Fixed-width integer fields are stored
// most significant bit first.
using Bits = std::vector<uint8_t>;

void append_uint(Bits& out, uint64_t value, int width);
void append_bits(Bits& out, const Bits& src);

// Reads `width` bits starting at `pos` as an unsigned integer.
uint64_t read_uint(const Bits& in, size_t pos, int width);

Bits uint_to_bits(uint64_t value, int width);

std::string to_hex(const Bits& bits);
Bits from_hex(const std::string& hex, size_t bit_len);

Bits random_bits(size_t n, std::mt19937_64& rng);

size_t hamming_distance(const Bits& a, const Bits& b);

}  // namespace nd
