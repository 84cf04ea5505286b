#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "noisydialog/bits.hpp"
#include "noisydialog/channel.hpp"
#include "noisydialog/dag.hpp"
#include "noisydialog/ecc.hpp"
#include "noisydialog/hash.hpp"
#include "noisydialog/meeting.hpp"

namespace nd {

struct RunConfig {
  double epsilon = 0.01;
  int64_t depth = 4096;      // rounds of the underlying protocol
  int64_t state_budget = 1 << 12;
  int c_i = 4;               // iteration slack multiplier
  int c_hash = 12;           // compressed hash width o2
  int c_b = 4;               // big hash width multiplier
  int c_delta = 2;           // bias exponent multiplier for the block seed
  bool mp3_enabled = true;   // scan the memory-backed third candidate
  bool rew_reset_on_error = false;  // clear the dummy flag on error resets too
  uint64_t seed = 1;
};

// Everything the schedule, the wire formats and both parties agree on up
// front. All of it is a pure function of (epsilon, d, s) and the config
// constants, so the two sides never have to negotiate.
struct DerivedParams {
  double epsilon = 0;
  int64_t d = 0;
  int64_t s = 0;

  int64_t r_c = 0;      // coupling constant for the chunk size
  int64_t r = 0;        // protocol rounds simulated per iteration
  int64_t i_block = 0;  // iterations per block
  int64_t i_total = 0;  // iterations needed for progress plus slack
  int64_t b_total = 0;  // blocks executed
  int64_t i_exec = 0;   // b_total * i_block >= i_total

  int o1 = 0, sd1 = 0, t1 = 0;  // wide per-iteration hash layer
  int t2 = 0, o2 = 0, sd2 = 0;  // compressing layer / verification slot width
  int o3 = 0, sd3 = 0, t3 = 0;  // block checkpoint hash

  int64_t ell_seed = 0;  // sd1 * i_block bits of block-level randomness
  BiasExtender pse;      // seed expander for those bits
  EccConfig ecc_seed;    // protects the expander seed on the wire
  EccConfig ecc_bh;      // protects each block checkpoint seed half

  HashParams small_outer;  // {t1, o1}
  HashParams small_inner;  // {t2, o2}
  HashParams big;          // {t3, o3}

  int w_iter = 0;    // bits for an iteration stamp
  int w_chunks = 0;  // bits for a per-block chunk count

  int64_t rounds_per_iter = 0;
  int64_t rounds_per_block = 0;
  int64_t total_rounds = 0;
  int64_t flip_budget = 0;  // floor(epsilon * total_rounds)

  int64_t progress_target = 0;  // ceil(d / r) iterations reach the terminals

  int max_checkpoint_bits() const;  // widest serialized checkpoint payload
};

DerivedParams derive_params(const RunConfig& cfg, int64_t s);

struct Segment {
  SegmentKind kind = SegmentKind::kCompute;
  int slot = -1;
  Party sender = Party::A;
  int64_t len = 0;
};

// One block's wire layout; identical for every block.
std::vector<Segment> block_segments(const DerivedParams& dp);

// One simulated transcript chunk: the r bits this party sent or heard while
// stepping from depth-1 to depth.
struct TranscriptChunk {
  Bits bits;
  int64_t iter = 0;
  int64_t depth = 0;
};

Bits encode_counter(int64_t k);
Bits encode_state(uint32_t v);
Bits encode_depth(int64_t depth, const DerivedParams& dp);

// The chained checkpoint payload (previous hash, previous seed, owned
// transcript chunks up to the checkpoint depth, iteration stamp). Fixed-width
// presence tags keep distinct contents from serializing identically.
Bits serialize_checkpoint(const MegaState& ms, const std::vector<TranscriptChunk>& t,
                          const DerivedParams& dp);

// Everything one party did during one iteration, kept for analysis and for
// scripted adversaries. Slot order: 0 window counter, 1 current state,
// 2 current checkpoint, then (state, checkpoint, depth) per candidate.
struct IterationRecord {
  int64_t iter = 0;
  int64_t block = 0;
  int64_t k_entry = 0;
  int64_t e_entry = 0;
  int64_t j = 0;
  int64_t depth_entry = 0;
  bool rew_entry = false;

  std::optional<int64_t> cand[3];
  bool avail[3] = {false, false, false};

  Bits r_iter;
  Bits chunk;
  Bits slot_payload[12];
  Bits slot_hash[12];
  Bits slot_recv[12];

  bool hk_match = false;
  bool hpv_match = false;
  bool hbig_match = false;
  bool vote_inc[3] = {false, false, false};

  bool simulated = false;
  Bits sim_chunk;

  bool error_reset = false;
  bool jumped = false;
  int jump_scale_i = 0;
  int64_t jump_target = -1;
  bool votes_reset = false;

  int64_t k_exit = 0;
  int64_t e_exit = 0;
  int64_t v_exit[3] = {0, 0, 0};
  int64_t depth_exit = 0;
  bool rew_exit = false;
  uint32_t state_exit = 0;
  std::vector<int64_t> mem_points;
};

struct BigHashEvent {
  Party party = Party::A;
  int64_t block = 0;
  int64_t depth = 0;
  int64_t iter = 0;
  Bits seed;
  Bits payload;
  Bits out;
};

struct BlockRandRecord {
  Bits pse_seed;  // this party's view of the expander seed
  Bits r_b1;      // checkpoint seed half sent by A
  Bits r_b2;      // checkpoint seed half sent by B
};

// One side of the noise-robust execution. The driver walks the global
// schedule and calls act() then hear() once per round; everything else
// (verification, simulation, rewinds, checkpoint chaining) happens at
// segment boundaries inside those two calls.
class RobustParty {
 public:
  RobustParty(const ProtocolDag& dag, const DerivedParams& dp, const RunConfig& cfg,
              Party role, uint64_t rng_seed);

  RoundAction act(const SegmentInfo& seg);
  void hear(const SegmentInfo& seg, std::optional<uint8_t> delivered);

  Party role() const { return role_; }
  const MegaState& cur() const { return cur_; }
  const MemoryStore& memory() const { return mem_; }
  const std::vector<TranscriptChunk>& transcript() const { return t_; }
  int64_t k() const { return k_; }
  int64_t e() const { return e_; }
  int64_t vote(int i) const { return votes_[i]; }
  bool rew() const { return rew_; }

  const std::vector<IterationRecord>& records() const { return records_; }
  const IterationRecord* live_record() const {
    return records_.empty() ? nullptr : &records_.back();
  }
  const std::vector<BigHashEvent>& big_events() const { return big_events_; }
  const std::vector<BlockRandRecord>& block_rand() const { return block_rand_; }

  int64_t jumps() const { return jumps_; }
  int64_t error_resets() const { return error_resets_; }

 private:
  void begin_segment(const SegmentInfo& seg);
  void end_segment(const SegmentInfo& seg);
  void start_iteration(const SegmentInfo& seg);
  void prepare_slots();
  void run_verification();
  void finish_compute();
  void finish_block(const SegmentInfo& seg);
  Bits chunk_for(int64_t idx_in_block) const;
  Bits hash_slot_payload(const Bits& payload) const;

  const ProtocolDag* dag_;
  const DerivedParams* dp_;
  Party role_;
  bool mp3_enabled_;
  bool rew_reset_on_error_;
  std::mt19937_64 rng_;

  MegaState cur_;
  MemoryStore mem_;
  std::vector<TranscriptChunk> t_;
  int64_t k_ = 0;
  int64_t e_ = 0;
  int64_t votes_[3] = {0, 0, 0};
  bool rew_ = false;

  int64_t iter_ = 0;          // global 1-based iteration counter
  int64_t iter_in_block_ = 0;

  Bits pse_seed_;      // this party's view, ell' bits
  Bits block_rand_all_;  // expanded ell_seed bits for the current block
  Bits r_b1_, r_b2_;

  // per-segment transients
  Bits wire_;      // outgoing bits for a one-way segment this party sends
  Bits rxbuf_;     // incoming bits while listening
  bool sim_mode_ = false;
  std::optional<SimStepper> stepper_;
  uint8_t pending_bit_ = 0;

  std::vector<IterationRecord> records_;
  std::vector<BigHashEvent> big_events_;
  std::vector<BlockRandRecord> block_rand_;
  int64_t jumps_ = 0;
  int64_t error_resets_ = 0;
};

// Working-set size in bits under the fixed field widths: remembered depths,
// checkpoint contents, pending transcript chunks, counters and flags, and
// the in-flight randomness.
int64_t measure_memory_bits(const RobustParty& party, const DerivedParams& dp);

}  // namespace nd
