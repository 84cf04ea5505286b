#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "noisydialog/harness.hpp"
#include "noisydialog/meeting.hpp"

using namespace nd;

TEST_CASE("rewind target sets at fixed depths") {
  CHECK(mp_set(12) == std::set<int64_t>{0, 8, 10, 11});
  CHECK(mp_set(0).empty());
  CHECK(mp_set(1) == std::set<int64_t>{0});
}

TEST_CASE("stability exponent") {
  CHECK(j_stable(12) == 2);
  CHECK(j_stable(1) == 0);
  CHECK(j_stable(96) == 5);
  CHECK(j_stable(0) == kJStableMax);
}

TEST_CASE("transition candidates at fixed scales") {
  CandidateTriple c = transition_candidates(1, 12);
  REQUIRE(c.mp1.has_value());
  REQUIRE(c.mp2.has_value());
  REQUIRE(c.mp3.has_value());
  CHECK(*c.mp1 == 8);
  CHECK(*c.mp2 == 10);
  CHECK(*c.mp3 == 10);

  c = transition_candidates(0, 1);
  CHECK_FALSE(c.mp1.has_value());
  CHECK(*c.mp2 == 0);
  CHECK(*c.mp3 == 0);

  c = transition_candidates(3, 12);
  CHECK_FALSE(c.mp1.has_value());
  CHECK(*c.mp2 == 0);
  CHECK(*c.mp3 == 8);
}

TEST_CASE("floor_mult") {
  CHECK(floor_mult(12, 8) == 8);
  CHECK(floor_mult(16, 8) == 16);
  CHECK(floor_mult(7, 8) == 0);
  CHECK(floor_mult(0, 4) == 0);
}

TEST_CASE("membership window of the point 4") {
  // The retained set for a move to depth a is mp_set(a) plus a itself, and 4
  // is 2-stable, so it should be a member exactly for a in [4, 11].
  auto member = [](int64_t p, int64_t a) {
    std::set<int64_t> s = mp_set(a);
    s.insert(a);
    return s.count(p) != 0;
  };
  CHECK_FALSE(member(4, 3));
  CHECK(member(4, 4));
  CHECK(member(4, 11));
  CHECK_FALSE(member(4, 12));
}

TEST_CASE("a 2-stable point is forgotten when depth first reaches p + 8") {
  MemoryStore store;
  MegaState root;
  store.maintain_avmps(root, 0, true);
  for (int64_t depth = 1; depth <= 16; ++depth) {
    MegaState ms;
    ms.depth = depth;
    store.maintain_avmps(ms, depth, true);
    if (depth >= 4 && depth <= 11) {
      CHECK(store.contains(4));
    } else {
      CHECK_FALSE(store.contains(4));
    }
  }
}

TEST_CASE("store size stays logarithmic in depth") {
  MemoryStore store;
  MegaState root;
  store.maintain_avmps(root, 0, true);
  for (int64_t depth = 1; depth <= 5000; ++depth) {
    MegaState ms;
    ms.depth = depth;
    store.maintain_avmps(ms, depth, true);
    double bound = 2.0 * std::ceil(std::log2(static_cast<double>(depth) + 2.0)) + 2.0;
    CHECK(static_cast<double>(store.size()) <= bound);
  }
}

TEST_CASE("rewinding to a stored point keeps it and drops deeper points") {
  MemoryStore store;
  MegaState root;
  store.maintain_avmps(root, 0, true);
  for (int64_t depth = 1; depth <= 12; ++depth) {
    MegaState ms;
    ms.depth = depth;
    store.maintain_avmps(ms, depth, true);
  }
  REQUIRE(store.contains(8));
  MegaState back = store.at(8);
  store.maintain_avmps(back, 8, false);
  CHECK(store.contains(8));
  CHECK_FALSE(store.contains(11));
  CHECK_FALSE(store.contains(12));
  for (int64_t p : store.points()) CHECK(p <= 8);
}

TEST_CASE("deepest divisible stored point") {
  MemoryStore store;
  MegaState root;
  store.maintain_avmps(root, 0, true);
  for (int64_t depth = 1; depth <= 12; ++depth) {
    MegaState ms;
    ms.depth = depth;
    store.maintain_avmps(ms, depth, true);
  }
  // Points now: {0, 8, 10, 11, 12}.
  CHECK(store.deepest_divisible(2, 12) == 12);
  CHECK(store.deepest_divisible(2, 11) == 8);
  CHECK(store.deepest_divisible(1, 11) == 10);
  CHECK(store.deepest_divisible(3, 7) == 0);
}

TEST_CASE("invariant suite at reduced scale") {
  std::vector<std::string> failures =
      selftest_meeting_points(1 << 9, 1 << 10, 1 << 8, 6, 200, 3);
  for (const std::string& msg : failures) MESSAGE(msg);
  CHECK(failures.empty());
}
