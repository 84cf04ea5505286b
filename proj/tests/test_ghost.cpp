#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "noisydialog/attacks.hpp"
#include "noisydialog/harness.hpp"

using namespace nd;

TEST_CASE("potential value on a synced pair") {
  // Equal counters use the progress branch: ell_plus + C1*(k_a + k_b).
  CHECK(phi_value(5, 0, 0, 2, 2, 0, 0, 0) == 9);
  CHECK(phi_value(0, 0, 0, 0, 0, 0, 0, 0) == 0);
  // Divergence is charged immediately.
  CHECK(phi_value(5, 1, 0, 0, 0, 0, 0, 0) == 5 - kC3);
  // Desynced counters flip to the recovery branch.
  CHECK(phi_value(5, 0, 0, 3, 1, 0, 0, 0) ==
        5 - (9 * kC4 / 10) * 4);
  CHECK(phi_value(5, 0, 0, 3, 1, 2, 0, 0) ==
        5 - (9 * kC4 / 10) * 4 + kC4 * 2);
}

TEST_CASE("clean runs gain at least one potential unit per iteration") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg;
    cfg.depth = 1024;
    cfg.seed = seed;
    RunProbe probe;
    AdversarySpec spec;  // noise free
    TrialResult tr = run_one_config(cfg, spec, &probe);
    CHECK(tr.success);
    CHECK(tr.phi_block_stable);
    CHECK(tr.upper_bound_breaches == 0);

    int64_t prev = 0;
    for (const GhostRow& row : probe.rows) {
      CHECK(row.phi - prev >= 1);
      prev = row.phi;
      CHECK(row.bvc_ab == 0);
      CHECK_FALSE(row.dangerous);
      CHECK_FALSE(row.corrupted);
    }
  }
}

TEST_CASE("vote corruption is only ever counted alongside an explanation") {
  RunConfig cfg;
  RunProbe probe;
  AdversarySpec spec;
  spec.kind = "sneaky_attack";
  TrialResult tr = run_one_config(cfg, spec, &probe);
  CHECK(tr.attack_completed);

  REQUIRE(probe.flips_per_iter.size() > probe.rows.size());
  for (const GhostRow& row : probe.rows) {
    if (!row.bvc_inc) continue;
    bool attacked = probe.flips_per_iter[static_cast<size_t>(row.iter)] > 0;
    CHECK((attacked || row.corrupted || row.small_collision));
  }
}

TEST_CASE("the first one-sided simulation pins the divergence point") {
  RunConfig cfg;
  RunProbe probe;
  AdversarySpec spec;
  spec.kind = "figure1_attack";
  TrialResult tr = run_one_config(cfg, spec, &probe);
  CHECK(tr.attack_completed);

  bool saw_divergence = false;
  int64_t depth_before = 0;
  for (size_t i = 0; i < probe.rows.size(); ++i) {
    const GhostRow& row = probe.rows[i];
    if (!saw_divergence && row.ell_minus > 0) {
      saw_divergence = true;
      // Paths agreed up to the depth both sides had already reached.
      REQUIRE(row.b.has_value());
      CHECK(*row.b <= depth_before);
      CHECK(row.phi < (i > 0 ? probe.rows[i - 1].phi : 0));
    }
    if (row.ell_minus == 0) {
      depth_before = std::min(row.ell_a, row.ell_b);
      if (row.b) CHECK(*row.b == std::min(row.ell_a, row.ell_b));
    }
  }
  CHECK(saw_divergence);
}

TEST_CASE("joint rewinds to a common point clear the divergence") {
  RunConfig cfg;
  RunProbe probe;
  AdversarySpec spec;
  spec.kind = "sneaky_attack";
  run_one_config(cfg, spec, &probe);

  bool saw_joint = false;
  for (const GhostRow& row : probe.rows) {
    if (row.jump_a && row.jump_b && *row.jump_a == *row.jump_b) {
      saw_joint = true;
      CHECK(row.ell_minus == 0);
    }
  }
  CHECK(saw_joint);
}

TEST_CASE("the staged-dive detector reconstructs the scripted window") {
  RunConfig cfg;
  RunProbe probe;
  AdversarySpec spec;
  spec.kind = "sneaky_attack";
  TrialResult tr = run_one_config(cfg, spec, &probe);
  REQUIRE(tr.attack_completed);
  CHECK_FALSE(tr.attack_degraded);
  CHECK(tr.sneaky_windows == 1);
  CHECK(tr.windows_disjoint);

  REQUIRE(probe.windows.size() == 1);
  const SneakyWindow& win = probe.windows.front();
  CHECK(win.w == 4);
  CHECK(win.p == 16);
  CHECK(win.t_p_hat < win.t_cq);
  CHECK(win.t_cq < win.t_q_hat);
  CHECK(win.t_q_hat < win.t_b);
  CHECK(win.t_b <= win.t_dagger);
  // One diving iteration per depth of the staged descent.
  CHECK(win.diving_window.size() == size_t{1} << (win.w - 1));
  for (int64_t it : win.diving_window) {
    CHECK(it >= win.t_p_hat);
    CHECK(it <= win.t_cq);
  }
}

TEST_CASE("repeated identical windows are rejected as overlapping") {
  RunConfig cfg;
  RunProbe probe;
  AdversarySpec spec;
  spec.kind = "sneaky_attack";
  run_one_config(cfg, spec, &probe);
  REQUIRE_FALSE(probe.rows.empty());

  std::vector<GhostRow> doubled = probe.rows;
  doubled.insert(doubled.end(), probe.rows.begin(), probe.rows.end());
  CHECK_THROWS_AS(detect_sneaky_windows(doubled), std::runtime_error);
}

TEST_CASE("trace output is one labelled row per iteration") {
  RunConfig cfg;
  cfg.depth = 256;
  ProtocolDag dag = build_random_dag(cfg.depth, cfg.state_budget, 2);
  std::stringstream trace;
  RunOptions opts;
  opts.ghost_trace = &trace;
  run_single(dag, cfg, opts);

  std::string text = trace.str();
  CHECK(text.find("I,ell_plus,ell_minus,L_minus,b,k_A,k_B,E_A,E_B,BVC_AB,phi,dangerous,"
                  "corrupted") == 0);
  DerivedParams dp = derive_params(cfg, dag.s);
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  CHECK(lines == dp.i_exec + 1);
}
