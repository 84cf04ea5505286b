#include "noisydialog/attacks.hpp"

#include <cstdint>

namespace nd {
namespace {

const IterationRecord* live(const RobustParty* p) {
  return p == nullptr ? nullptr : p->live_record();
}

// True when the wire bit at pos differs from the listener's own value for
// this slot; flipping every such bit makes the listener receive exactly its
// own hash, at a cost equal to the Hamming distance.
bool forge_bit(const IterationRecord& sender, const IterationRecord& listener, int slot,
               int64_t pos) {
  const Bits& s = sender.slot_hash[slot];
  const Bits& l = listener.slot_hash[slot];
  if (s.size() != l.size() || pos < 0 || pos >= static_cast<int64_t>(s.size())) return false;
  return s[static_cast<size_t>(pos)] != l[static_cast<size_t>(pos)];
}

// One-bit spoiler: flips the first bit only when the listener would
// otherwise receive exactly its own value, guaranteeing a mismatch at unit
// cost and spending nothing when the values already disagree.
bool spoil_bit(const IterationRecord& sender, const IterationRecord& listener, int slot,
               int64_t pos) {
  return pos == 0 && sender.slot_hash[slot] == listener.slot_hash[slot];
}

// Per-candidate verification slots: q_i occupies slots 3i+3 (state),
// 3i+4 (checkpoint), 3i+5 (depth).
constexpr int kDepthSlotQ1 = 5;
constexpr int kDepthSlotQ2 = 8;
constexpr int kDepthSlotQ3 = 11;

class Figure1Attack final : public ScriptedAttack {
 public:
  Figure1Attack(const DerivedParams& dp, int64_t max_cycles)
      : dp_(dp), max_cycles_(max_cycles) {}

  std::string name() const override { return "figure1_attack"; }
  bool completed() const override { return cycles_ >= max_cycles_; }
  bool degraded() const override { return cycles_ == 0; }

  AdversaryDecision decide(const RoundContext& ctx) override {
    AdversaryDecision d;
    const IterationRecord* ra = live(ctx.party_a);
    const IterationRecord* rb = live(ctx.party_b);
    if (ra == nullptr || rb == nullptr) return d;
    sync(*ctx.party_a, *ctx.party_b);

    if (ctx.seg.kind == SegmentKind::kCompute && phase_ == Phase::kIdle &&
        cycles_ < max_cycles_) {
      // Desync both parties one bit past a freshly minted scale-3 point: flip
      // a single heard simulation bit while both sides step off a depth
      // divisible by 8. The denial below then drags the window to k=15,
      // where the formula candidates sit 9 deep but the remembered one is
      // a single step back.
      int64_t depth = ra->depth_entry;
      if (ra->simulated && rb->simulated && rb->depth_entry == depth && depth >= 8 &&
          depth % 8 == 0 && depth > last_flip_depth_ &&
          depth + 4 < dp_.progress_target && ctx.b_transmits && !ctx.a_transmits &&
          ctx.budget != nullptr && ctx.budget->spent < ctx.budget->limit) {
        d.flip_to_a = true;
        phase_ = Phase::kDeny;
        last_flip_depth_ = depth;
        cycle_start_iter_ = ra->iter;
      }
      return d;
    }

    if (ctx.seg.kind == SegmentKind::kVerify && phase_ == Phase::kDeny &&
        (ctx.seg.slot == kDepthSlotQ1 || ctx.seg.slot == kDepthSlotQ2 ||
         ctx.seg.slot == kDepthSlotQ3) &&
        ra->k_entry >= 2 && ra->k_entry <= 7) {
      // Both sides share all three candidates, so the depth hashes agree;
      // one flipped bit per slot vetoes every vote in the small windows.
      if (ctx.seg.sender == Party::A) {
        d.flip_to_b = spoil_bit(*ra, *rb, ctx.seg.slot, ctx.seg.pos);
      } else {
        d.flip_to_a = spoil_bit(*rb, *ra, ctx.seg.slot, ctx.seg.pos);
      }
    }
    return d;
  }

 private:
  enum class Phase { kIdle, kDeny };

  void sync(const RobustParty& a, const RobustParty& b) {
    const auto& recs = a.records();
    if (recs.empty()) return;
    if (recs.back().iter == seen_iter_) return;
    seen_iter_ = recs.back().iter;
    if (phase_ != Phase::kDeny || recs.size() < 2) return;
    const IterationRecord& pa = recs[recs.size() - 2];
    const IterationRecord& pb = b.records()[b.records().size() - 2];
    bool window_closed = pa.k_exit == 0 && pa.k_entry >= 2;
    bool resumed = pa.iter > cycle_start_iter_ && pa.simulated && pb.simulated;
    if (window_closed || resumed) {
      phase_ = Phase::kIdle;
      ++cycles_;
    }
  }

  DerivedParams dp_;
  int64_t max_cycles_ = 8;
  Phase phase_ = Phase::kIdle;
  int64_t cycles_ = 0;
  int64_t last_flip_depth_ = 0;
  int64_t cycle_start_iter_ = 0;
  int64_t seen_iter_ = -1;
};

// Staged dive at scale w=4: p=16, p_hat=32, q=24, c_q=40. Party A is walked
// from p_hat to c_q against B's dummy zeros, forgetting q on the resolving
// jump back to p_hat; a short forced rewind parks B just below p_hat, and a
// final forged window sends both to p in the same iteration.
class SneakyAttack final : public ScriptedAttack {
 public:
  explicit SneakyAttack(const DerivedParams& dp) : dp_(dp) {}

  std::string name() const override { return "sneaky_attack"; }
  bool completed() const override { return completed_; }
  bool degraded() const override { return degraded_; }

  AdversaryDecision decide(const RoundContext& ctx) override {
    AdversaryDecision d;
    const IterationRecord* ra = live(ctx.party_a);
    const IterationRecord* rb = live(ctx.party_b);
    if (ra == nullptr || rb == nullptr) return d;
    sync(*ctx.party_a, *ctx.party_b);
    if (ctx.seg.kind != SegmentKind::kVerify) return d;

    const int slot = ctx.seg.slot;
    const int64_t pos = ctx.seg.pos;
    const bool a_sends = ctx.seg.sender == Party::A;
    switch (phase_) {
      case Phase::kDive:
        // Keep B parked on counter mismatches while A's own state and
        // checkpoint hashes are echoed back at it, so A keeps simulating
        // against dummy input.
        if (a_sends && slot == 0) d.flip_to_b = spoil_bit(*ra, *rb, 0, pos);
        if (!a_sends && (slot == 1 || slot == 2))
          d.flip_to_a = forge_bit(*rb, *ra, slot, pos);
        break;
      case Phase::kResolve:
        // A now fails its own state check naturally and climbs the window;
        // its counter check has to be kept green while B stays parked, and
        // the deepest candidate gets a forged vote in the top window.
        if (a_sends && slot == 0) d.flip_to_b = spoil_bit(*ra, *rb, 0, pos);
        if (!a_sends && slot == 0) d.flip_to_a = forge_bit(*rb, *ra, 0, pos);
        if (!a_sends && slot >= 9 && ra->k_entry >= 8)
          d.flip_to_a = forge_bit(*rb, *ra, slot, pos);
        break;
      case Phase::kStep4:
        // Two forged votes push B one small rewind below p_hat.
        if (a_sends && slot >= 9 && rb->k_entry >= 2 && rb->k_entry <= 3)
          d.flip_to_b = forge_bit(*ra, *rb, slot, pos);
        break;
      case Phase::kFinal:
        // Both sides share the checkpoint at p but disagree on which
        // candidate it is; forging the two depth echoes completes the
        // joint jump.
        if (!a_sends && slot == kDepthSlotQ1 && ra->k_entry >= 8)
          d.flip_to_a = forge_bit(*rb, *ra, kDepthSlotQ1, pos);
        if (a_sends && slot == kDepthSlotQ2 && rb->k_entry >= 8)
          d.flip_to_b = forge_bit(*ra, *rb, kDepthSlotQ2, pos);
        break;
      default:
        break;
    }
    return d;
  }

 private:
  enum class Phase { kCruise, kDive, kResolve, kPostq, kStep4, kPark, kFinal, kDone };

  static constexpr int64_t kP = 16;
  static constexpr int64_t kPhat = 32;
  static constexpr int64_t kCq = 40;

  void give_up() {
    phase_ = Phase::kDone;
    degraded_ = true;
  }

  void sync(const RobustParty& a, const RobustParty& b) {
    const auto& recs = a.records();
    if (recs.empty()) return;
    const IterationRecord& ra = recs.back();
    if (ra.iter == seen_iter_) return;
    seen_iter_ = ra.iter;
    const IterationRecord& rb = b.records().back();
    const IterationRecord* pa = recs.size() >= 2 ? &recs[recs.size() - 2] : nullptr;
    const IterationRecord* pb =
        recs.size() >= 2 ? &b.records()[b.records().size() - 2] : nullptr;

    switch (phase_) {
      case Phase::kCruise:
        if (ra.depth_entry == kPhat && rb.depth_entry == kPhat && ra.k_entry == 1 &&
            rb.k_entry == 1 && ra.e_entry == 0 && rb.e_entry == 0 && !ra.rew_entry &&
            !rb.rew_entry) {
          enter(Phase::kDive, ra.iter);
        } else if (ra.depth_entry > kPhat) {
          give_up();
        }
        break;
      case Phase::kDive:
        if (ra.depth_entry == kCq) {
          enter(Phase::kResolve, ra.iter);
        } else if (ra.depth_entry > kCq || ra.iter - phase_iter_ > 16) {
          give_up();
        }
        break;
      case Phase::kResolve:
        if (pa != nullptr && pa->jumped) {
          if (pa->jump_target == kPhat) {
            enter(Phase::kPostq, ra.iter);
          } else {
            give_up();
          }
        } else if (ra.iter - phase_iter_ > 40) {
          give_up();
        }
        break;
      case Phase::kPostq:
        if (ra.k_entry == 2 && rb.k_entry == 2) {
          enter(Phase::kStep4, ra.iter);
        } else if (ra.iter - phase_iter_ > 16) {
          give_up();
        }
        break;
      case Phase::kStep4:
        if (pb != nullptr && pb->jumped) {
          if (pb->jump_target >= kPhat - 2 && pb->jump_target < kPhat) {
            enter(Phase::kPark, ra.iter);
          } else {
            give_up();
          }
        } else if (ra.iter - phase_iter_ > 8) {
          give_up();
        }
        break;
      case Phase::kPark:
        if (ra.k_entry == 8 && rb.k_entry == 8) {
          enter(Phase::kFinal, ra.iter);
        } else if (ra.iter - phase_iter_ > 60) {
          give_up();
        }
        break;
      case Phase::kFinal:
        if (pa != nullptr && pb != nullptr && pa->jumped && pb->jumped &&
            pa->jump_target == pb->jump_target) {
          phase_ = Phase::kDone;
          completed_ = true;
        } else if (pa != nullptr && pb != nullptr && pa->jumped != pb->jumped) {
          give_up();
        } else if (ra.iter - phase_iter_ > 16) {
          give_up();
        }
        break;
      case Phase::kDone:
        break;
    }
  }

  void enter(Phase next, int64_t iter) {
    phase_ = next;
    phase_iter_ = iter;
  }

  DerivedParams dp_;
  Phase phase_ = Phase::kCruise;
  int64_t phase_iter_ = 0;
  int64_t seen_iter_ = -1;
  bool completed_ = false;
  bool degraded_ = false;
};

}  // namespace

std::unique_ptr<ScriptedAttack> make_figure1_attack(const DerivedParams& dp,
                                                    int64_t max_cycles) {
  return std::make_unique<Figure1Attack>(dp, max_cycles);
}

std::unique_ptr<ScriptedAttack> make_sneaky_attack(const DerivedParams& dp) {
  return std::make_unique<SneakyAttack>(dp);
}

}  // namespace nd
