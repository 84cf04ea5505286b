#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "noisydialog/channel.hpp"

using namespace nd;

namespace {

// Fixed decision every round, for exercising the delivery rules one case at
// a time.
struct OneDecision : Adversary {
  AdversaryDecision want;
  AdversaryDecision decide(const RoundContext&) override { return want; }
  std::string name() const override { return "one_decision"; }
};

RoundAction talk(uint8_t bit) { return RoundAction{true, bit}; }
RoundAction listen() { return RoundAction{false, 0}; }

}  // namespace

TEST_CASE("simultaneous transmission cancels") {
  OneDecision adv;
  adv.want.flip_to_a = true;  // nothing to flip, must not charge
  adv.want.flip_to_b = true;
  Channel ch(adv, Budget{10, 0, 0}, 1);
  DeliveredRound dr = ch.exchange(SegmentInfo{}, talk(1), talk(0));
  CHECK_FALSE(dr.to_a.has_value());
  CHECK_FALSE(dr.to_b.has_value());
  CHECK(dr.cost == 0);
  CHECK(ch.budget().spent == 0);
  CHECK(ch.budget().denied == 0);
}

TEST_CASE("mutual silence lets the adversary inject for free") {
  OneDecision adv;
  adv.want.inject_a = 1;
  adv.want.inject_b = 1;
  Channel ch(adv, Budget{10, 0, 0}, 1);
  DeliveredRound dr = ch.exchange(SegmentInfo{}, listen(), listen());
  REQUIRE(dr.to_a.has_value());
  REQUIRE(dr.to_b.has_value());
  CHECK(*dr.to_a == 1);
  CHECK(*dr.to_b == 1);
  CHECK(dr.cost == 0);
  CHECK(ch.budget().spent == 0);
}

TEST_CASE("a lone transmitter reaches the listener unless a paid flip lands") {
  OneDecision honest;
  Channel clean(honest, Budget{10, 0, 0}, 1);
  DeliveredRound dr = clean.exchange(SegmentInfo{}, talk(0), listen());
  CHECK_FALSE(dr.to_a.has_value());
  REQUIRE(dr.to_b.has_value());
  CHECK(*dr.to_b == 0);
  CHECK(clean.budget().spent == 0);

  OneDecision flipper;
  flipper.want.flip_to_b = true;
  Channel noisy(flipper, Budget{10, 0, 0}, 1);
  dr = noisy.exchange(SegmentInfo{}, talk(0), listen());
  REQUIRE(dr.to_b.has_value());
  CHECK(*dr.to_b == 1);
  CHECK(dr.cost == 1);
  CHECK(noisy.budget().spent == 1);
}

TEST_CASE("flips aimed at the transmitter are ignored") {
  OneDecision adv;
  adv.want.flip_to_a = true;  // A transmits, so there is nothing to flip to A
  Channel ch(adv, Budget{10, 0, 0}, 1);
  DeliveredRound dr = ch.exchange(SegmentInfo{}, talk(1), listen());
  REQUIRE(dr.to_b.has_value());
  CHECK(*dr.to_b == 1);
  CHECK(dr.cost == 0);
  CHECK(ch.budget().spent == 0);
}

TEST_CASE("an exhausted budget denies flips and delivers the truth") {
  OneDecision adv;
  adv.want.flip_to_b = true;
  Channel ch(adv, Budget{1, 0, 0}, 1);
  DeliveredRound first = ch.exchange(SegmentInfo{}, talk(0), listen());
  CHECK(*first.to_b == 1);
  DeliveredRound second = ch.exchange(SegmentInfo{}, talk(0), listen());
  CHECK(*second.to_b == 0);
  CHECK(second.cost == 0);
  CHECK(ch.budget().spent == 1);
  CHECK(ch.budget().denied == 1);
}

TEST_CASE("certain random flipping spends the whole limit up front") {
  auto adv = make_random_flip(1.0);
  Channel ch(*adv, Budget{5, 0, 0}, 42);
  for (int round = 0; round < 5; ++round) {
    DeliveredRound dr = ch.exchange(SegmentInfo{}, talk(0), listen());
    CHECK(*dr.to_b == 1);
    CHECK(dr.cost == 1);
  }
  CHECK(ch.budget().spent == 5);
  DeliveredRound dr = ch.exchange(SegmentInfo{}, talk(0), listen());
  CHECK(*dr.to_b == 0);
  CHECK(ch.budget().spent == 5);
}

TEST_CASE("noise free spends nothing and delivers faithfully") {
  auto adv = make_noise_free();
  Channel ch(*adv, Budget{100, 0, 0}, 3);
  for (int round = 0; round < 50; ++round) {
    uint8_t bit = static_cast<uint8_t>(round & 1);
    DeliveredRound dr = round % 2 == 0 ? ch.exchange(SegmentInfo{}, talk(bit), listen())
                                       : ch.exchange(SegmentInfo{}, listen(), talk(bit));
    if (round % 2 == 0) {
      CHECK(*dr.to_b == bit);
      CHECK_FALSE(dr.to_a.has_value());
    } else {
      CHECK(*dr.to_a == bit);
      CHECK_FALSE(dr.to_b.has_value());
    }
  }
  CHECK(ch.budget().spent == 0);
  CHECK(ch.rounds() == 50);
}

TEST_CASE("burst flips exactly its window") {
  auto adv = make_burst(3, 4);
  Channel ch(*adv, Budget{100, 0, 0}, 3);
  for (int round = 0; round < 10; ++round) {
    DeliveredRound dr = ch.exchange(SegmentInfo{}, talk(0), listen());
    bool inside = round >= 3 && round < 7;
    CHECK(*dr.to_b == (inside ? 1 : 0));
  }
  CHECK(ch.budget().spent == 4);
}

TEST_CASE("round log records actions and spend") {
  std::stringstream log;
  OneDecision adv;
  adv.want.flip_to_b = true;
  Channel ch(adv, Budget{10, 0, 0}, 1, &log);
  ch.exchange(SegmentInfo{}, talk(0), listen());
  ch.exchange(SegmentInfo{}, listen(), talk(1));
  std::string text = log.str();
  CHECK(text.find("round,a_action,b_action,delivered_a,delivered_b,spent") == 0);
  // One header plus one line per round.
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 3);
}
