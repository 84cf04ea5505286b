#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "noisydialog/harness.hpp"
#include "noisydialog/hash.hpp"

using namespace nd;

TEST_CASE("outputs match the checked-in vectors") {
  std::ifstream golden(TEST_DATA_DIR "/hash_vectors.txt");
  REQUIRE(golden.good());
  std::stringstream want;
  want << golden.rdbuf();
  std::stringstream got;
  write_hash_vectors(got);
  CHECK(got.str() == want.str());
}

TEST_CASE("hex round trip") {
  std::mt19937_64 rng(21);
  for (size_t len : {1u, 7u, 8u, 13u, 64u, 97u}) {
    Bits x = random_bits(len, rng);
    CHECK(from_hex(to_hex(x), len) == x);
  }
}

TEST_CASE("pairwise hash basics") {
  HashParams params{64, 8};
  std::mt19937_64 rng(22);
  Bits seed = random_bits(static_cast<size_t>(params.sd()), rng);
  Bits x = random_bits(40, rng);
  Bits h = pairwise_hash(x, seed, params);
  CHECK(h.size() == 8);
  CHECK(pairwise_hash(x, seed, params) == h);

  // The length prefix separates a string from its zero extension.
  Bits padded = x;
  padded.push_back(0);
  bool all_same = true;
  for (int trial = 0; trial < 64; ++trial) {
    Bits s = random_bits(static_cast<size_t>(params.sd()), rng);
    all_same = all_same && pairwise_hash(x, s, params) == pairwise_hash(padded, s, params);
  }
  CHECK_FALSE(all_same);

  CHECK_THROWS(pairwise_hash(random_bits(65, rng), seed, params));
}

TEST_CASE("pairwise collision rate stays under the seed-counting bound") {
  HashParams params{64, 8};
  std::mt19937_64 rng(23);
  Bits x = random_bits(64, rng);
  Bits y = random_bits(64, rng);
  REQUIRE(x != y);
  int collisions = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    Bits seed = random_bits(static_cast<size_t>(params.sd()), rng);
    if (pairwise_hash(x, seed, params) == pairwise_hash(y, seed, params)) ++collisions;
  }
  double bound = std::ceil((32.0 + params.t) / params.o) / std::pow(2.0, params.o);
  CHECK(static_cast<double>(collisions) / draws <= 2.0 * bound);
}

TEST_CASE("extender bits are reproducible and match bulk expansion") {
  BiasExtender cfg = make_extender(500, 9);
  std::mt19937_64 rng(24);
  Bits seed = random_bits(static_cast<size_t>(cfg.seed_len()), rng);
  Bits all = extend_all(seed, cfg);
  REQUIRE(all.size() == 500);
  for (size_t i = 0; i < all.size(); i += 17) {
    CHECK(extend_bit(seed, i, cfg) == all[i]);
  }
}

TEST_CASE("extender output is roughly balanced across seeds") {
  BiasExtender cfg = make_extender(64, 9);
  std::mt19937_64 rng(25);
  int64_t ones = 0;
  int64_t total = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Bits seed = random_bits(static_cast<size_t>(cfg.seed_len()), rng);
    Bits out = extend_all(seed, cfg);
    for (uint8_t b : out) ones += b;
    total += static_cast<int64_t>(out.size());
  }
  double freq = static_cast<double>(ones) / static_cast<double>(total);
  CHECK(freq > 0.45);
  CHECK(freq < 0.55);
}

TEST_CASE("two-layer hash responds to every keying input") {
  HashParams outer{128, 14};
  HashParams inner{14, 12};
  std::mt19937_64 rng(26);
  Bits x = random_bits(100, rng);
  Bits r_iter = random_bits(static_cast<size_t>(inner.sd()), rng);
  Bits chunk = random_bits(static_cast<size_t>(outer.sd()), rng);
  Bits base = small_hash(x, r_iter, chunk, outer, inner);
  CHECK(base.size() == 12);

  auto differs_somewhere = [&](auto mutate) {
    for (int trial = 0; trial < 32; ++trial) {
      Bits x2 = x, r2 = r_iter, c2 = chunk;
      mutate(trial, x2, r2, c2);
      if (small_hash(x2, r2, c2, outer, inner) != base) return true;
    }
    return false;
  };
  CHECK(differs_somewhere([&](int t, Bits& x2, Bits&, Bits&) {
    x2[static_cast<size_t>(t) % x2.size()] ^= 1;
  }));
  CHECK(differs_somewhere([&](int t, Bits&, Bits& r2, Bits&) {
    r2[static_cast<size_t>(t) % r2.size()] ^= 1;
  }));
  CHECK(differs_somewhere([&](int t, Bits&, Bits&, Bits& c2) {
    c2[static_cast<size_t>(t) % c2.size()] ^= 1;
  }));
}

TEST_CASE("block hash width and determinism") {
  HashParams params{256, 48};
  std::mt19937_64 rng(27);
  Bits payload = random_bits(200, rng);
  Bits seed = random_bits(static_cast<size_t>(params.sd()), rng);
  Bits h = big_hash(payload, seed, params);
  CHECK(h.size() == 48);
  CHECK(big_hash(payload, seed, params) == h);
  Bits other = payload;
  other[3] ^= 1;
  // 48-bit outputs over random 96-bit seeds: a collision here would be a bug.
  CHECK(big_hash(other, seed, params) != h);
}
