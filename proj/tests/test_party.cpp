#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "noisydialog/harness.hpp"
#include "noisydialog/party.hpp"

using namespace nd;

TEST_CASE("derived parameters at the reference point") {
  RunConfig cfg;  // epsilon 0.01, depth 4096, states 2^12
  DerivedParams dp = derive_params(cfg, cfg.state_budget);

  CHECK(dp.r_c == 3);
  CHECK(dp.r == 18);
  CHECK(dp.i_block == 12);
  CHECK(dp.i_total == 392);
  CHECK(dp.b_total == 33);
  CHECK(dp.i_exec == 396);

  CHECK(dp.o1 == 14);
  CHECK(dp.sd1 == 28);
  CHECK(dp.t1 == 796);
  CHECK(dp.t2 == 14);
  CHECK(dp.o2 == 12);
  CHECK(dp.sd2 == 24);
  CHECK(dp.o3 == 48);
  CHECK(dp.sd3 == 96);
  CHECK(dp.w_iter == 9);

  CHECK(dp.ell_seed == 336);
  CHECK(dp.ecc_seed.block_len == 366);
  CHECK(dp.ecc_bh.block_len == 342);

  CHECK(dp.rounds_per_iter == 330);
  CHECK(dp.rounds_per_block == 5010);
  CHECK(dp.total_rounds == 165330);
  CHECK(dp.flip_budget == 1653);
  CHECK(dp.progress_target == 228);
}

TEST_CASE("degenerate noise rates are rejected") {
  RunConfig cfg;
  cfg.epsilon = 0.0;
  CHECK_THROWS(derive_params(cfg, cfg.state_budget));
  cfg.epsilon = -0.1;
  CHECK_THROWS(derive_params(cfg, cfg.state_budget));
}

TEST_CASE("the block schedule is a pure function of the parameters") {
  RunConfig cfg;
  DerivedParams dp = derive_params(cfg, cfg.state_budget);
  std::vector<Segment> segs = block_segments(dp);

  int64_t total = 0;
  int64_t iter_seeds = 0;
  int64_t verifies = 0;
  int64_t computes = 0;
  for (const Segment& s : segs) {
    total += s.len;
    iter_seeds += s.kind == SegmentKind::kIterSeed ? 1 : 0;
    verifies += s.kind == SegmentKind::kVerify ? 1 : 0;
    computes += s.kind == SegmentKind::kCompute ? 1 : 0;
  }
  CHECK(total == dp.rounds_per_block);
  CHECK(iter_seeds == dp.i_block);
  CHECK(computes == dp.i_block);
  // Twelve hash slots, each answered by both sides.
  CHECK(verifies == dp.i_block * 24);
  CHECK(segs.front().kind == SegmentKind::kSeedShare);
  CHECK(segs.back().kind == SegmentKind::kBigHashB);

  // Same inputs, same layout.
  std::vector<Segment> again = block_segments(dp);
  REQUIRE(again.size() == segs.size());
  for (size_t i = 0; i < segs.size(); ++i) {
    CHECK(again[i].kind == segs[i].kind);
    CHECK(again[i].slot == segs[i].slot);
    CHECK(again[i].sender == segs[i].sender);
    CHECK(again[i].len == segs[i].len);
  }
}

TEST_CASE("a quiet run advances one depth per iteration") {
  RunConfig cfg;
  cfg.depth = 256;
  cfg.seed = 9;
  ProtocolDag dag = build_random_dag(cfg.depth, cfg.state_budget, 17);
  DerivedParams dp = derive_params(cfg, dag.s);
  RunProbe probe;
  RunOptions opts;
  opts.probe = &probe;
  TrialResult tr = run_single(dag, cfg, opts);

  CHECK(tr.success);
  CHECK(tr.jumps == 0);
  CHECK(tr.error_resets == 0);
  CHECK(tr.budget_spent == 0);
  CHECK(tr.total_rounds == dp.total_rounds);
  CHECK(tr.ell_plus == dp.i_exec);  // padding keeps simulating past the leaves

  for (size_t i = 0; i < probe.rows.size(); ++i) {
    const GhostRow& row = probe.rows[i];
    CHECK(row.ell_a == static_cast<int64_t>(i) + 1);
    CHECK(row.ell_b == static_cast<int64_t>(i) + 1);
    CHECK(row.ell_minus == 0);
    CHECK(row.k_a == 0);  // counters are cleared by each successful iteration
    CHECK(row.e_a == 0);
  }
}

namespace {

// Flips the first verification bit (the counter hash) of one iteration,
// toward the receiving side.
struct FlipOneCounterHash : Adversary {
  int64_t target_iter = 5;
  bool done = false;
  AdversaryDecision decide(const RoundContext& ctx) override {
    AdversaryDecision d;
    if (done || ctx.seg.kind != SegmentKind::kVerify) return d;
    if (ctx.seg.iter_global != target_iter || ctx.seg.slot != 0) return d;
    if (ctx.seg.pos != 0) return d;
    if (ctx.a_transmits && !ctx.b_transmits) {
      d.flip_to_b = true;
      done = true;
    }
    return d;
  }
  std::string name() const override { return "flip_one_counter_hash"; }
};

}  // namespace

TEST_CASE("a corrupted counter hash stalls only the listener") {
  RunConfig cfg;
  cfg.depth = 1024;
  cfg.seed = 4;
  ProtocolDag dag = build_random_dag(cfg.depth, cfg.state_budget, 31);
  DerivedParams dp = derive_params(cfg, dag.s);

  FlipOneCounterHash adv;
  Channel channel(adv, Budget{dp.flip_budget, 0, 0}, 77);
  RobustParty a(dag, dp, cfg, Party::A, 101);
  RobustParty b(dag, dp, cfg, Party::B, 102);

  std::vector<Segment> segs = block_segments(dp);
  int64_t iter_global = 0;
  for (int64_t blk = 0; blk < dp.b_total; ++blk) {
    for (const Segment& s : segs) {
      if (s.kind == SegmentKind::kIterSeed) ++iter_global;
      bool iter_level = s.kind == SegmentKind::kIterSeed ||
                        s.kind == SegmentKind::kVerify || s.kind == SegmentKind::kCompute;
      SegmentInfo si{s.kind, blk, iter_level ? iter_global : 0, s.slot, s.sender, 0, s.len};
      for (int64_t pos = 0; pos < s.len; ++pos) {
        si.pos = pos;
        RoundAction ra = a.act(si);
        RoundAction rb = b.act(si);
        DeliveredRound dr = channel.exchange(si, ra, rb, &a, &b);
        a.hear(si, dr.to_a);
        b.hear(si, dr.to_b);
      }
    }
  }

  CHECK(channel.budget().spent == 1);
  const IterationRecord& hit_a = a.records()[4];  // iteration 5, zero-based
  const IterationRecord& hit_b = b.records()[4];
  CHECK(hit_a.simulated);
  CHECK_FALSE(hit_b.hk_match);
  CHECK_FALSE(hit_b.simulated);
  CHECK(hit_b.error_reset);
  CHECK(hit_b.k_exit == 0);
  CHECK(hit_b.e_exit == 0);

  // One stalled iteration costs little; the run still finishes.
  CHECK(a.cur().depth >= dp.progress_target);
  CHECK(b.cur().depth >= dp.progress_target);

  // The three counters always clear as a unit.
  for (const RobustParty* p : {&a, &b}) {
    for (const IterationRecord& rec : p->records()) {
      if (rec.k_exit == 0) {
        CHECK(rec.e_exit == 0);
        CHECK(rec.v_exit[0] == 0);
        CHECK(rec.v_exit[1] == 0);
        CHECK(rec.v_exit[2] == 0);
      }
      if (rec.votes_reset) {
        CHECK(rec.v_exit[0] == 0);
        CHECK(rec.v_exit[1] == 0);
        CHECK(rec.v_exit[2] == 0);
      }
    }
  }
}

TEST_CASE("rewinds land on remembered points") {
  RunConfig cfg;
  RunProbe probe;
  AdversarySpec spec;
  spec.kind = "figure1_attack";
  TrialResult tr = run_one_config(cfg, spec, &probe);
  CHECK(tr.jumps > 0);

  bool saw_jump = false;
  for (const GhostRow& row : probe.rows) {
    if (row.jump_a) {
      saw_jump = true;
      CHECK(std::find(row.mem_a.begin(), row.mem_a.end(), *row.jump_a) != row.mem_a.end());
      CHECK(row.ell_a == *row.jump_a);
    }
    if (row.jump_b) {
      saw_jump = true;
      CHECK(std::find(row.mem_b.begin(), row.mem_b.end(), *row.jump_b) != row.mem_b.end());
      CHECK(row.ell_b == *row.jump_b);
    }
  }
  CHECK(saw_jump);
}

TEST_CASE("counters reset together") {
  RunConfig cfg;
  cfg.depth = 1024;
  RunProbe probe;
  AdversarySpec spec;
  spec.kind = "random_flip";
  spec.flip_p = 0.01;
  run_one_config(cfg, spec, &probe);

  // Whenever the iteration counter ends at zero, so does the error counter.
  for (const GhostRow& row : probe.rows) {
    if (row.k_a == 0) CHECK(row.e_a == 0);
    if (row.k_b == 0) CHECK(row.e_b == 0);
  }
}

TEST_CASE("memory cost tracks the checkpoint count") {
  RunConfig cfg;
  cfg.depth = 1024;
  ProtocolDag dag = build_random_dag(cfg.depth, cfg.state_budget, 13);
  DerivedParams dp = derive_params(cfg, dag.s);
  RobustParty a(dag, dp, cfg, Party::A, 55);
  int64_t fresh = measure_memory_bits(a, dp);
  CHECK(fresh > 0);
  // A fresh party remembers exactly the root.
  CHECK(a.memory().size() == 1);
  CHECK(a.memory().contains(0));
}
