#include "noisydialog/bits.hpp"

#include <stdexcept>

namespace nd {

void append_uint(Bits& out, uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) {
    out.push_back(static_cast<uint8_t>((value >> i) & 1u));
  }
}

void append_bits(Bits& out, const Bits& src) {
  out.insert(out.end(), src.begin(), src.end());
}

uint64_t read_uint(const Bits& in, size_t pos, int width) {
  if (pos + static_cast<size_t>(width) > in.size()) {
    throw std::out_of_range("read_uint past end of bit string");
  }
  uint64_t value = 0;
  for (int i = 0; i < width; ++i) {
    value = (value << 1) | in[pos + static_cast<size_t>(i)];
  }
  return value;
}

Bits uint_to_bits(uint64_t value, int width) {
  Bits out;
  out.reserve(static_cast<size_t>(width));
  append_uint(out, value, width);
  return out;
}

std::string to_hex(const Bits& bits) {
  static const char* digits = "0123456789abcdef";
  std::string hex;
  hex.reserve((bits.size() + 3) / 4);
  // Pad the front so the string length encodes ceil(n/4) nibbles.
  size_t lead = (4 - bits.size() % 4) % 4;
  uint8_t nibble = 0;
  size_t filled = lead;
  for (uint8_t b : bits) {
    nibble = static_cast<uint8_t>((nibble << 1) | b);
    if (++filled == 4) {
      hex.push_back(digits[nibble]);
      nibble = 0;
      filled = 0;
    }
  }
  return hex;
}

Bits from_hex(const std::string& hex, size_t bit_len) {
  Bits all;
  all.reserve(hex.size() * 4);
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      v = c - 'A' + 10;
    } else {
      throw std::invalid_argument("bad hex digit");
    }
    for (int i = 3; i >= 0; --i) {
      all.push_back(static_cast<uint8_t>((v >> i) & 1));
    }
  }
  if (bit_len > all.size()) {
    throw std::invalid_argument("hex string shorter than requested bit length");
  }
  // Drop the pad bits that to_hex added at the front.
  return Bits(all.end() - static_cast<long>(bit_len), all.end());
}

Bits random_bits(size_t n, std::mt19937_64& rng) {
  Bits out;
  out.reserve(n);
  uint64_t word = 0;
  int avail = 0;
  for (size_t i = 0; i < n; ++i) {
    if (avail == 0) {
      word = rng();
      avail = 64;
    }
    out.push_back(static_cast<uint8_t>(word & 1u));
    word >>= 1;
    --avail;
  }
  return out;
}

size_t hamming_distance(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("hamming_distance length mismatch");
  }
  size_t dist = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dist += static_cast<size_t>(a[i] != b[i]);
  }
  return dist;
}

}  // namespace nd
