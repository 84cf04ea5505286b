#include "noisydialog/channel.hpp"

#include <ostream>

namespace nd {

DeliveredRound deliver_round(const RoundContext& ctx, const AdversaryDecision& want,
                             Budget& budget) {
  DeliveredRound out;
  if (ctx.a_transmits && ctx.b_transmits) return out;  // collision, nobody hears
  if (!ctx.a_transmits && !ctx.b_transmits) {
    out.to_a = want.inject_a & 1;
    out.to_b = want.inject_b & 1;
    return out;
  }
  if (ctx.a_transmits) {
    uint8_t bit = ctx.a_bit & 1;
    if (want.flip_to_b && budget.try_spend()) {
      bit ^= 1;
      out.cost = 1;
    }
    out.to_b = bit;
  } else {
    uint8_t bit = ctx.b_bit & 1;
    if (want.flip_to_a && budget.try_spend()) {
      bit ^= 1;
      out.cost = 1;
    }
    out.to_a = bit;
  }
  return out;
}

Channel::Channel(Adversary& adversary, Budget budget, uint64_t rng_seed, std::ostream* log)
    : adversary_(&adversary), budget_(budget), rng_(rng_seed), log_(log) {
  if (log_) *log_ << "round,a_action,b_action,delivered_a,delivered_b,spent\n";
}

DeliveredRound Channel::exchange(const SegmentInfo& seg, RoundAction a, RoundAction b,
                                 const RobustParty* pa, const RobustParty* pb) {
  RoundContext ctx;
  ctx.round = round_;
  ctx.seg = seg;
  ctx.a_transmits = a.transmit;
  ctx.b_transmits = b.transmit;
  ctx.a_bit = a.bit;
  ctx.b_bit = b.bit;
  ctx.budget = &budget_;
  ctx.rng = &rng_;
  ctx.party_a = pa;
  ctx.party_b = pb;
  AdversaryDecision want = adversary_->decide(ctx);
  DeliveredRound got = deliver_round(ctx, want, budget_);
  if (log_) {
    auto act = [](const RoundAction& r) {
      return r.transmit ? (r.bit ? "T1" : "T0") : "L";
    };
    auto shown = [](const std::optional<uint8_t>& d) {
      return d ? (*d ? "1" : "0") : "-";
    };
    *log_ << round_ << ',' << act(a) << ',' << act(b) << ',' << shown(got.to_a) << ','
          << shown(got.to_b) << ',' << budget_.spent << "\n";
  }
  ++round_;
  return got;
}

namespace {

class NoiseFree final : public Adversary {
 public:
  AdversaryDecision decide(const RoundContext&) override { return {}; }
  std::string name() const override { return "noise_free"; }
};

class RandomFlip final : public Adversary {
 public:
  explicit RandomFlip(double p) : p_(p) {}
  AdversaryDecision decide(const RoundContext& ctx) override {
    AdversaryDecision d;
    if (ctx.a_transmits == ctx.b_transmits) return d;
    if (ctx.budget->spent >= ctx.budget->limit) return d;
    double u = static_cast<double>((*ctx.rng)() >> 11) * 0x1.0p-53;
    if (u < p_) {
      d.flip_to_a = !ctx.a_transmits;
      d.flip_to_b = !ctx.b_transmits;
    }
    return d;
  }
  std::string name() const override { return "random_flip"; }

 private:
  double p_;
};

class Burst final : public Adversary {
 public:
  Burst(int64_t start, int64_t length) : start_(start), end_(start + length) {}
  AdversaryDecision decide(const RoundContext& ctx) override {
    AdversaryDecision d;
    if (ctx.round < start_ || ctx.round >= end_) return d;
    if (ctx.a_transmits == ctx.b_transmits) return d;
    d.flip_to_a = !ctx.a_transmits;
    d.flip_to_b = !ctx.b_transmits;
    return d;
  }
  std::string name() const override { return "burst"; }

 private:
  int64_t start_;
  int64_t end_;
};

class GreedyDesync final : public Adversary {
 public:
  AdversaryDecision decide(const RoundContext& ctx) override {
    AdversaryDecision d;
    if (ctx.seg.kind != SegmentKind::kCompute) return d;
    if (!ctx.a_transmits && !ctx.b_transmits) {
      d.inject_a = 0;
      d.inject_b = 1;
      return d;
    }
    if (ctx.a_transmits != ctx.b_transmits && ctx.budget->spent < ctx.budget->limit) {
      d.flip_to_a = !ctx.a_transmits;
      d.flip_to_b = !ctx.b_transmits;
    }
    return d;
  }
  std::string name() const override { return "greedy_desync"; }
};

}  // namespace

std::unique_ptr<Adversary> make_noise_free() { return std::make_unique<NoiseFree>(); }
std::unique_ptr<Adversary> make_random_flip(double p) {
  return std::make_unique<RandomFlip>(p);
}
std::unique_ptr<Adversary> make_burst(int64_t start_round, int64_t length) {
  return std::make_unique<Burst>(start_round, length);
}
std::unique_ptr<Adversary> make_greedy_desync() { return std::make_unique<GreedyDesync>(); }

}  // namespace nd
