#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "noisydialog/channel.hpp"
#include "noisydialog/dag.hpp"
#include "noisydialog/ghost.hpp"
#include "noisydialog/party.hpp"

namespace nd {

// Which channel adversary to run, parsed from strings like "noise_free",
// "random_flip:0.25" or "burst:1000:200".
struct AdversarySpec {
  std::string kind = "noise_free";
  double flip_p = 1.0;
  int64_t burst_start = 0;
  int64_t burst_len = 0;

  static AdversarySpec parse(const std::string& text);
};

struct TrialResult {
  uint64_t seed = 0;
  bool success = false;
  int64_t total_rounds = 0;
  double overhead = 0.0;  // total_rounds / d - 1
  int64_t peak_memory_bits_a = 0;
  int64_t peak_memory_bits_b = 0;
  int64_t jumps = 0;
  int64_t error_resets = 0;
  int64_t dangerous_iterations = 0;
  int64_t small_collisions = 0;
  int64_t big_collisions = 0;
  int64_t corrupted_iterations = 0;
  int64_t corrupted_blocks = 0;
  int64_t budget_limit = 0;
  int64_t budget_spent = 0;
  int64_t budget_denied = 0;
  int64_t ell_plus = 0;
  int64_t phi = 0;
  bool phi_block_stable = true;
  int64_t upper_bound_breaches = 0;
  int64_t max_rewind = 0;  // deepest single jump, in iterations of depth
  bool attack_completed = false;
  bool attack_degraded = false;
  int64_t sneaky_windows = 0;
  bool windows_disjoint = true;
  double wall_ms = 0.0;
};

// Optional deep-inspection output for tests: the full ghost table, the
// per-iteration adversary spend, and the reconstructed attack windows.
struct RunProbe {
  std::vector<GhostRow> rows;
  std::vector<int64_t> flips_per_iter;  // index 0 collects block-level spend
  std::vector<SneakyWindow> windows;
  bool windows_overlap = false;
  Bits path_a;
  Bits path_b;
};

struct RunOptions {
  AdversarySpec adversary;
  std::ostream* channel_log = nullptr;
  std::ostream* ghost_trace = nullptr;
  RunProbe* probe = nullptr;
};

// One full robust execution of the given protocol against the configured
// adversary, driven round by round over the fixed schedule.
TrialResult run_single(const ProtocolDag& dag, const RunConfig& cfg, const RunOptions& opts);

// Builds the protocol from the config (seeded by cfg.seed) and runs it once.
TrialResult run_one_config(const RunConfig& cfg, const AdversarySpec& adv,
                           RunProbe* probe = nullptr);

// Independent trials over one protocol; trial t runs with seed cfg.seed + t.
std::vector<TrialResult> run_trials(const ProtocolDag& dag, const RunConfig& cfg,
                                    const AdversarySpec& adv, int trials, int workers);

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& results);
void write_aggregate_json(std::ostream& out, const RunConfig& cfg,
                          const std::string& adversary,
                          const std::vector<TrialResult>& results);

// Same seeds, same protocols, third candidate on versus off; reports the
// success split and a one-sided sign test on per-pair max rewinds.
struct PairedAttackReport {
  int pairs = 0;
  int successes_on = 0;
  int successes_off = 0;
  int rewind_larger_off = 0;  // pairs where the disabled arm rewound deeper
  int rewind_larger_on = 0;
  int rewind_ties = 0;
  double sign_test_p = 1.0;
  std::vector<TrialResult> on;
  std::vector<TrialResult> off;
};
PairedAttackReport figure1_experiment(const RunConfig& cfg, int trials, int workers);

// P[Bin(n, 1/2) >= k], the one-sided sign-test tail.
double binomial_one_sided_p(int n, int k);

// Deterministic hash / extender / codec vectors at the default parameter
// point, one "name hex" line each. The checked-in copy lives at
// tests/data/hash_vectors.txt; regenerate with the vectors subcommand.
void write_hash_vectors(std::ostream& out);

// Exhaustive and randomized meeting-point checks; returns descriptions of
// violations (empty when all hold).
//  - membership interval: p in mp_set(a) iff a in [p, p + 2^(j+1) - 1]
//  - common candidate under small offsets at scale j
//  - retention against the walk oracle, plus the forgotten-scale jump rule
std::vector<std::string> selftest_meeting_points(int64_t p_max, int64_t a_max,
                                                 int64_t ell_max, int64_t j_max, int walks,
                                                 uint64_t seed);

}  // namespace nd
