#include "noisydialog/party.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nd {

namespace {

int ceil_log2_i64(int64_t x) {
  if (x <= 1) return 0;
  int bits = 0;
  int64_t v = 1;
  while (v < x) {
    v <<= 1;
    ++bits;
  }
  return bits;
}

int64_t floor_log2_i64(int64_t x) {
  int64_t j = 0;
  while ((x >> (j + 1)) > 0) ++j;
  return j;
}

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace

int DerivedParams::max_checkpoint_bits() const {
  return 1 + o3 + 1 + sd3 + w_iter + w_chunks +
         static_cast<int>(i_block) * (static_cast<int>(r) + w_iter);
}

DerivedParams derive_params(const RunConfig& cfg, int64_t s) {
  if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 0.125))
    throw std::invalid_argument("derive_params: epsilon must lie in (0, 1/8)");
  if (cfg.depth < 16) throw std::invalid_argument("derive_params: depth must be >= 16");
  if (s < 1) throw std::invalid_argument("derive_params: empty protocol");

  DerivedParams dp;
  dp.epsilon = cfg.epsilon;
  dp.d = cfg.depth;
  dp.s = s;

  double log_inv = std::log2(1.0 / cfg.epsilon);
  dp.r_c = std::max<int64_t>(2, static_cast<int64_t>(std::ceil(std::log2(log_inv))));
  dp.r = static_cast<int64_t>(
      std::ceil(std::sqrt(static_cast<double>(dp.r_c) / cfg.epsilon)));
  dp.i_block = ceil_log2_i64(dp.d);
  dp.progress_target = ceil_div(dp.d, dp.r);
  dp.i_total = dp.progress_target +
               static_cast<int64_t>(std::ceil(cfg.c_i * cfg.epsilon * static_cast<double>(dp.d)));
  dp.b_total = ceil_div(dp.i_total, dp.i_block);
  dp.i_exec = dp.b_total * dp.i_block;

  int logd = ceil_log2_i64(dp.d);
  int logs = std::max(1, ceil_log2_i64(s));
  dp.o1 = 2 * static_cast<int>(std::ceil(log_inv));
  dp.sd1 = 2 * dp.o1;
  dp.t1 = logs + 2 * static_cast<int>(dp.r) * logd + 2 * logd * logd + 64;
  dp.t2 = dp.o1;
  dp.o2 = cfg.c_hash;
  dp.sd2 = 2 * dp.o2;
  dp.o3 = cfg.c_b * logd;
  dp.sd3 = 2 * dp.o3;

  dp.w_iter = ceil_log2_i64(dp.i_exec + 1);
  dp.w_chunks = ceil_log2_i64(dp.i_block + 1);
  dp.t3 = dp.max_checkpoint_bits() + 64;

  dp.ell_seed = static_cast<int64_t>(dp.sd1) * dp.i_block;
  dp.pse = make_extender(static_cast<size_t>(dp.ell_seed),
                         cfg.c_delta * static_cast<int>(dp.i_block));
  dp.ecc_seed = make_ecc_config(dp.pse.seed_len(), static_cast<int>(dp.i_block));
  dp.ecc_bh = make_ecc_config(dp.o3, static_cast<int>(dp.i_block));

  dp.small_outer = HashParams{dp.t1, dp.o1};
  dp.small_inner = HashParams{dp.t2, dp.o2};
  dp.big = HashParams{dp.t3, dp.o3};

  dp.rounds_per_iter = dp.sd2 + 24 * dp.o2 + dp.r;
  dp.rounds_per_block =
      dp.ecc_seed.block_len + dp.i_block * dp.rounds_per_iter + 2 * dp.ecc_bh.block_len;
  dp.total_rounds = dp.b_total * dp.rounds_per_block;
  dp.flip_budget =
      static_cast<int64_t>(cfg.epsilon * static_cast<double>(dp.total_rounds));

  if (dp.max_checkpoint_bits() > dp.t1)
    throw std::logic_error("derive_params: checkpoint payload exceeds wide hash capacity");
  return dp;
}

std::vector<Segment> block_segments(const DerivedParams& dp) {
  std::vector<Segment> segs;
  segs.push_back({SegmentKind::kSeedShare, -1, Party::A, dp.ecc_seed.block_len});
  for (int64_t i = 0; i < dp.i_block; ++i) {
    segs.push_back({SegmentKind::kIterSeed, -1, Party::A, dp.sd2});
    for (int slot = 0; slot < 12; ++slot) {
      segs.push_back({SegmentKind::kVerify, slot, Party::A, dp.o2});
      segs.push_back({SegmentKind::kVerify, slot, Party::B, dp.o2});
    }
    segs.push_back({SegmentKind::kCompute, -1, Party::A, dp.r});
  }
  segs.push_back({SegmentKind::kBigHashA, -1, Party::A, dp.ecc_bh.block_len});
  segs.push_back({SegmentKind::kBigHashB, -1, Party::B, dp.ecc_bh.block_len});
  return segs;
}

Bits encode_counter(int64_t k) {
  Bits out;
  append_uint(out, static_cast<uint64_t>(k), 32);
  return out;
}

Bits encode_state(uint32_t v) {
  Bits out;
  append_uint(out, v, 32);
  return out;
}

Bits encode_depth(int64_t depth, const DerivedParams& dp) {
  Bits out;
  append_uint(out, static_cast<uint64_t>(depth), dp.w_iter);
  return out;
}

Bits serialize_checkpoint(const MegaState& ms, const std::vector<TranscriptChunk>& t,
                          const DerivedParams& dp) {
  Bits out;
  out.push_back(ms.prev_hash ? 1 : 0);
  if (ms.prev_hash) {
    if (static_cast<int>(ms.prev_hash->size()) != dp.o3)
      throw std::logic_error("serialize_checkpoint: bad chained hash width");
    append_bits(out, *ms.prev_hash);
  } else {
    out.insert(out.end(), static_cast<size_t>(dp.o3), 0);
  }
  out.push_back(ms.prev_seed ? 1 : 0);
  if (ms.prev_seed) {
    if (static_cast<int>(ms.prev_seed->size()) != dp.sd3)
      throw std::logic_error("serialize_checkpoint: bad chained seed width");
    append_bits(out, *ms.prev_seed);
  } else {
    out.insert(out.end(), static_cast<size_t>(dp.sd3), 0);
  }
  append_uint(out, static_cast<uint64_t>(ms.iter), dp.w_iter);
  uint64_t count = 0;
  for (const auto& c : t)
    if (c.depth <= ms.depth) ++count;
  append_uint(out, count, dp.w_chunks);
  for (const auto& c : t) {
    if (c.depth > ms.depth) continue;
    if (static_cast<int64_t>(c.bits.size()) != dp.r)
      throw std::logic_error("serialize_checkpoint: bad chunk width");
    append_bits(out, c.bits);
    append_uint(out, static_cast<uint64_t>(c.iter), dp.w_iter);
  }
  return out;
}

RobustParty::RobustParty(const ProtocolDag& dag, const DerivedParams& dp,
                         const RunConfig& cfg, Party role, uint64_t rng_seed)
    : dag_(&dag),
      dp_(&dp),
      role_(role),
      mp3_enabled_(cfg.mp3_enabled),
      rew_reset_on_error_(cfg.rew_reset_on_error),
      rng_(rng_seed) {
  cur_.v = static_cast<uint32_t>(dag.root);
  cur_.depth = 0;
  cur_.iter = 0;
  mem_.maintain_avmps(cur_, 0, true);
  records_.reserve(static_cast<size_t>(dp.i_exec));
}

Bits RobustParty::chunk_for(int64_t idx_in_block) const {
  size_t lo = static_cast<size_t>(idx_in_block) * static_cast<size_t>(dp_->sd1);
  return Bits(block_rand_all_.begin() + static_cast<int64_t>(lo),
              block_rand_all_.begin() + static_cast<int64_t>(lo) + dp_->sd1);
}

Bits RobustParty::hash_slot_payload(const Bits& payload) const {
  const IterationRecord& rec = records_.back();
  return small_hash(payload, rec.r_iter, rec.chunk, dp_->small_outer, dp_->small_inner);
}

RoundAction RobustParty::act(const SegmentInfo& seg) {
  if (seg.pos == 0) begin_segment(seg);
  if (seg.kind == SegmentKind::kCompute) {
    if (!sim_mode_) return {true, 0};
    if (stepper_->speaking()) {
      pending_bit_ = stepper_->out_bit();
      return {true, pending_bit_};
    }
    return {false, 0};
  }
  if (seg.sender == role_) return {true, wire_[static_cast<size_t>(seg.pos)]};
  return {false, 0};
}

void RobustParty::hear(const SegmentInfo& seg, std::optional<uint8_t> delivered) {
  if (seg.kind == SegmentKind::kCompute) {
    if (sim_mode_) {
      uint8_t bit = stepper_->speaking() ? pending_bit_
                                         : static_cast<uint8_t>(delivered ? (*delivered & 1) : 0);
      records_.back().sim_chunk.push_back(bit);
      stepper_->step(bit);
    }
  } else if (seg.sender != role_) {
    rxbuf_.push_back(delivered ? (*delivered & 1) : 0);
  }
  if (seg.pos == seg.len - 1) end_segment(seg);
}

void RobustParty::begin_segment(const SegmentInfo& seg) {
  wire_.clear();
  rxbuf_.clear();
  switch (seg.kind) {
    case SegmentKind::kSeedShare:
      iter_in_block_ = 0;
      if (role_ == Party::A) {
        pse_seed_ = random_bits(static_cast<size_t>(dp_->pse.seed_len()), rng_);
        wire_ = ecc_encode(pse_seed_, dp_->ecc_seed);
        block_rand_all_ = extend_all(pse_seed_, dp_->pse);
      }
      break;
    case SegmentKind::kIterSeed:
      start_iteration(seg);
      if (role_ == Party::A) {
        records_.back().r_iter = random_bits(static_cast<size_t>(dp_->sd2), rng_);
        wire_ = records_.back().r_iter;
      }
      break;
    case SegmentKind::kVerify:
      if (seg.sender == role_) wire_ = records_.back().slot_hash[seg.slot];
      break;
    case SegmentKind::kCompute: {
      run_verification();
      IterationRecord& rec = records_.back();
      sim_mode_ = (k_ == 1 && e_ == 0 && !rew_ && rec.hpv_match && rec.hbig_match);
      if (sim_mode_) {
        stepper_.emplace(*dag_, static_cast<int32_t>(cur_.v), role_);
        rec.simulated = true;
      } else {
        rew_ = true;
      }
      break;
    }
    case SegmentKind::kBigHashA:
      if (role_ == Party::A) {
        r_b1_ = random_bits(static_cast<size_t>(dp_->o3), rng_);
        wire_ = ecc_encode(r_b1_, dp_->ecc_bh);
      }
      break;
    case SegmentKind::kBigHashB:
      if (role_ == Party::B) {
        r_b2_ = random_bits(static_cast<size_t>(dp_->o3), rng_);
        wire_ = ecc_encode(r_b2_, dp_->ecc_bh);
      }
      break;
  }
}

void RobustParty::end_segment(const SegmentInfo& seg) {
  switch (seg.kind) {
    case SegmentKind::kSeedShare:
      if (role_ == Party::B) {
        pse_seed_ = ecc_decode(rxbuf_, dp_->ecc_seed);
        block_rand_all_ = extend_all(pse_seed_, dp_->pse);
      }
      block_rand_.push_back({pse_seed_, {}, {}});
      break;
    case SegmentKind::kIterSeed:
      if (role_ == Party::B) records_.back().r_iter = rxbuf_;
      prepare_slots();
      break;
    case SegmentKind::kVerify:
      if (seg.sender != role_) records_.back().slot_recv[seg.slot] = rxbuf_;
      break;
    case SegmentKind::kCompute:
      finish_compute();
      break;
    case SegmentKind::kBigHashA:
      if (role_ == Party::B) r_b1_ = ecc_decode(rxbuf_, dp_->ecc_bh);
      break;
    case SegmentKind::kBigHashB:
      if (role_ == Party::A) r_b2_ = ecc_decode(rxbuf_, dp_->ecc_bh);
      finish_block(seg);
      break;
  }
}

void RobustParty::start_iteration(const SegmentInfo& seg) {
  ++iter_;
  ++iter_in_block_;
  ++k_;
  if (seg.iter_global != iter_)
    throw std::logic_error("schedule drift: iteration index mismatch");
  records_.emplace_back();
  IterationRecord& rec = records_.back();
  rec.iter = iter_;
  rec.block = seg.block;
  rec.k_entry = k_;
  rec.e_entry = e_;
  rec.j = floor_log2_i64(k_);
  rec.depth_entry = cur_.depth;
  rec.rew_entry = rew_;
  rec.chunk = chunk_for(iter_in_block_ - 1);
}

void RobustParty::prepare_slots() {
  IterationRecord& rec = records_.back();
  CandidateTriple cand = transition_candidates(rec.j, cur_.depth);
  const std::optional<int64_t> cands[3] = {cand.mp1, cand.mp2, cand.mp3};
  for (int i = 0; i < 3; ++i) {
    rec.cand[i] = cands[i];
    rec.avail[i] = cands[i].has_value() && mem_.contains(*cands[i]);
  }
  rec.slot_payload[0] = encode_counter(k_);
  rec.slot_payload[1] = encode_state(cur_.v);
  rec.slot_payload[2] = serialize_checkpoint(cur_, t_, *dp_);
  for (int i = 0; i < 3; ++i) {
    Bits pv, pb, pd;
    if (rec.avail[i]) {
      const MegaState& ms = mem_.at(*cands[i]);
      pv.push_back(1);
      append_bits(pv, encode_state(ms.v));
      pb.push_back(1);
      append_bits(pb, serialize_checkpoint(ms, t_, *dp_));
      pd.push_back(1);
      append_bits(pd, encode_depth(ms.depth, *dp_));
    } else {
      pv.push_back(0);
      pb.push_back(0);
      pd.push_back(0);
    }
    rec.slot_payload[3 + 3 * i] = pv;
    rec.slot_payload[4 + 3 * i] = pb;
    rec.slot_payload[5 + 3 * i] = pd;
  }
  for (int s = 0; s < 12; ++s) rec.slot_hash[s] = hash_slot_payload(rec.slot_payload[s]);
}

void RobustParty::run_verification() {
  IterationRecord& rec = records_.back();
  rec.hk_match = rec.slot_recv[0] == rec.slot_hash[0];
  rec.hpv_match = rec.slot_recv[1] == rec.slot_hash[1];
  rec.hbig_match = rec.slot_recv[2] == rec.slot_hash[2];
  if (!rec.hk_match) {
    ++e_;
    return;
  }
  // A candidate collects a vote when the other side shows the same state and
  // checkpoint under any of its slots and agrees on the depth at this slot.
  for (int i = 0; i < 3; ++i) {
    if (rec.slot_recv[5 + 3 * i] != rec.slot_hash[5 + 3 * i]) continue;
    for (int jp = 0; jp < 3; ++jp) {
      if (rec.slot_recv[3 + 3 * jp] == rec.slot_hash[3 + 3 * i] &&
          rec.slot_recv[4 + 3 * jp] == rec.slot_hash[4 + 3 * i]) {
        ++votes_[i];
        rec.vote_inc[i] = true;
        break;
      }
    }
  }
}

void RobustParty::finish_compute() {
  IterationRecord& rec = records_.back();
  if (sim_mode_) {
    cur_.v = static_cast<uint32_t>(stepper_->node());
    cur_.depth += 1;
    cur_.iter = iter_;
    t_.push_back({rec.sim_chunk, iter_, cur_.depth});
    mem_.maintain_avmps(cur_, cur_.depth, true);
    k_ = 0;
    e_ = 0;
    votes_[0] = votes_[1] = votes_[2] = 0;
    rec.votes_reset = true;
    stepper_.reset();
    sim_mode_ = false;
  }

  if (2 * e_ >= k_) {
    if (k_ >= 1) {
      ++error_resets_;
      rec.error_reset = true;
      rec.votes_reset = true;
      if (rew_reset_on_error_) rew_ = false;
    }
    k_ = 0;
    e_ = 0;
    votes_[0] = votes_[1] = votes_[2] = 0;
  } else if (k_ == (int64_t{1} << (rec.j + 1)) - 1) {
    if (k_ > 1) {
      for (int i = 3; i >= 1; --i) {
        if (i == 3 && !mp3_enabled_) continue;
        if (!rec.avail[i - 1]) continue;
        if (5 * votes_[i - 1] < (int64_t{1} << (rec.j + 1))) continue;
        int64_t target = *rec.cand[i - 1];
        cur_ = mem_.at(target);
        while (!t_.empty() && t_.back().depth > target) t_.pop_back();
        mem_.maintain_avmps(cur_, target, false);
        rew_ = false;
        k_ = 0;
        e_ = 0;
        ++jumps_;
        rec.jumped = true;
        rec.jump_scale_i = i;
        rec.jump_target = target;
        break;
      }
    }
    votes_[0] = votes_[1] = votes_[2] = 0;
    rec.votes_reset = true;
  }

  rec.k_exit = k_;
  rec.e_exit = e_;
  for (int i = 0; i < 3; ++i) rec.v_exit[i] = votes_[i];
  rec.depth_exit = cur_.depth;
  rec.rew_exit = rew_;
  rec.state_exit = cur_.v;
  rec.mem_points = mem_.points();
}

void RobustParty::finish_block(const SegmentInfo& seg) {
  Bits r_block = r_b1_;
  append_bits(r_block, r_b2_);
  int64_t lo = seg.block * dp_->i_block + 1;
  int64_t hi = (seg.block + 1) * dp_->i_block;
  mem_.for_each([&](int64_t depth, MegaState& ms) {
    if (ms.iter < lo || ms.iter > hi) return;
    Bits payload = serialize_checkpoint(ms, t_, *dp_);
    Bits out = big_hash(payload, r_block, dp_->big);
    big_events_.push_back({role_, seg.block, depth, ms.iter, r_block, payload, out});
    ms.prev_hash = out;
    ms.prev_seed = r_block;
  });
  cur_ = mem_.at(cur_.depth);
  t_.clear();
  block_rand_.back().r_b1 = r_b1_;
  block_rand_.back().r_b2 = r_b2_;
}

int64_t measure_memory_bits(const RobustParty& party, const DerivedParams& dp) {
  int logd = ceil_log2_i64(dp.d);
  int logs = std::max(1, ceil_log2_i64(dp.s));
  int64_t msize = static_cast<int64_t>(party.memory().size());
  int64_t per_checkpoint = logs + dp.o3 + dp.sd3 + 2 * logd;
  return msize * logd + (msize + 1) * per_checkpoint +
         static_cast<int64_t>(party.transcript().size()) * (dp.r + logd) +
         8 * ceil_log2_i64(dp.i_exec + 1) + 1 + dp.pse.seed_len() + dp.sd2 + dp.sd3;
}

}  // namespace nd
