#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "noisydialog/dag.hpp"

namespace nd {

class RobustParty;

// Where a round sits inside the block schedule. Adversaries key their
// behaviour off these fields instead of re-deriving the layout.
enum class SegmentKind : uint8_t {
  kSeedShare,    // block randomness seed, one-way with guard coding
  kIterSeed,     // per-iteration raw randomness
  kVerify,       // hash comparison slots
  kCompute,      // the r simulated rounds
  kBigHashA,     // block checkpoint randomness, A to B
  kBigHashB,     // block checkpoint randomness, B to A
};

struct SegmentInfo {
  SegmentKind kind = SegmentKind::kCompute;
  int64_t block = 0;        // 0-based block index
  int64_t iter_global = 0;  // 1-based iteration, 0 for block-level segments
  int slot = -1;            // verification slot 0..11, -1 elsewhere
  Party sender = Party::A;  // transmitting side for one-way segments
  int64_t pos = 0;          // bit offset within this segment
  int64_t len = 0;          // segment length in rounds
};

struct RoundAction {
  bool transmit = false;
  uint8_t bit = 0;
};

struct Budget {
  int64_t limit = 0;
  int64_t spent = 0;
  int64_t denied = 0;  // flip requests refused for lack of budget

  bool try_spend() {
    if (spent >= limit) {
      ++denied;
      return false;
    }
    ++spent;
    return true;
  }
};

// What the adversary wants done this round. Flips cost one unit each and
// apply only when exactly one side transmits; injections are free and apply
// only when both sides listen.
struct AdversaryDecision {
  bool flip_to_a = false;
  bool flip_to_b = false;
  uint8_t inject_a = 0;
  uint8_t inject_b = 0;
};

struct RoundContext {
  int64_t round = 0;
  SegmentInfo seg;
  bool a_transmits = false;
  bool b_transmits = false;
  uint8_t a_bit = 0;
  uint8_t b_bit = 0;
  const Budget* budget = nullptr;
  std::mt19937_64* rng = nullptr;
  const RobustParty* party_a = nullptr;
  const RobustParty* party_b = nullptr;
};

struct DeliveredRound {
  std::optional<uint8_t> to_a;  // set only if A listened
  std::optional<uint8_t> to_b;
  int64_t cost = 0;
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual AdversaryDecision decide(const RoundContext& ctx) = 0;
  virtual std::string name() const = 0;
};

// Applies one round of the speak-or-listen channel: simultaneous transmits
// cancel, a lone transmitter reaches the listener unless a budgeted flip
// lands, and silence lets the adversary feed both listeners for free.
DeliveredRound deliver_round(const RoundContext& ctx, const AdversaryDecision& want,
                             Budget& budget);

class Channel {
 public:
  Channel(Adversary& adversary, Budget budget, uint64_t rng_seed,
          std::ostream* log = nullptr);

  DeliveredRound exchange(const SegmentInfo& seg, RoundAction a, RoundAction b,
                          const RobustParty* pa = nullptr, const RobustParty* pb = nullptr);

  const Budget& budget() const { return budget_; }
  int64_t rounds() const { return round_; }

 private:
  Adversary* adversary_;
  Budget budget_;
  std::mt19937_64 rng_;
  std::ostream* log_;
  int64_t round_ = 0;
};

std::unique_ptr<Adversary> make_noise_free();
// Flips each eligible bit independently with probability p while budget lasts.
std::unique_ptr<Adversary> make_random_flip(double p);
// Flips every eligible bit inside [start_round, start_round + length).
std::unique_ptr<Adversary> make_burst(int64_t start_round, int64_t length);
// Spends everything on simulation rounds: flips lone-transmitter compute bits
// and hands disagreeing bits to simultaneous listeners.
std::unique_ptr<Adversary> make_greedy_desync();

}  // namespace nd
