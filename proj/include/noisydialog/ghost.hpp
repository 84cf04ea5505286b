#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noisydialog/dag.hpp"
#include "noisydialog/party.hpp"

namespace nd {

// Weights of the progress potential. The relations asserted below are what
// the drift argument needs: rewinds must dominate divergence, error resets
// must dominate rewinds, and bad votes must dominate everything.
inline constexpr int64_t kCStar = 3;
inline constexpr int64_t kC1 = 1;
inline constexpr int64_t kC2 = 32;
inline constexpr int64_t kC3 = 64;
inline constexpr int64_t kC4 = 7000;
inline constexpr int64_t kC5 = 8000;
inline constexpr int64_t kC6 = 9000;
inline constexpr int64_t kCUpper = 36000;

static_assert(2 * kC1 >= 1);
static_assert(6 * kC4 >= 400 * (1 + kC2 + kC3));
static_assert(kC2 >= (int64_t{1} << (kCStar + 2)) * kC1);
static_assert(kC6 > 16 * kC1);
static_assert(kC1 < kC2 && kC2 < kC3 && kC3 < kC4 && kC4 < kC5 && kC5 < kC6);
static_assert(kC4 % 10 == 0);

// One iteration as seen by the omniscient observer. ell_* are measured in
// iterations of depth; b is the deepest point where both recorded paths and
// all commonly remembered checkpoints still coincide (absent when the
// parties fully agree).
struct GhostRow {
  int64_t iter = 0;
  int64_t ell_a = 0;
  int64_t ell_b = 0;
  int64_t ell_plus = 0;
  int64_t ell_minus = 0;
  int64_t l_minus = 0;
  std::optional<int64_t> b;
  int64_t k_a = 0, k_b = 0;
  int64_t e_a = 0, e_b = 0;
  int64_t bvc_ab = 0;
  int64_t phi = 0;
  bool dangerous = false;
  bool corrupted = false;
  bool small_collision = false;  // some compared slot pair hashed equal on unequal payloads
  bool bvc_inc = false;          // either party's bad-vote counter grew this iteration

  std::optional<int64_t> sim_depth_a;  // depth reached if the party simulated
  std::optional<int64_t> sim_depth_b;
  std::optional<int64_t> jump_a;  // rewind target if the party jumped
  std::optional<int64_t> jump_b;
  bool votes_reset_a = false;
  bool votes_reset_b = false;
  std::vector<int64_t> mem_a;  // remembered depths at iteration end
  std::vector<int64_t> mem_b;
};

int64_t phi_value(int64_t ell_plus, int64_t ell_minus, int64_t l_minus, int64_t k_a,
                  int64_t k_b, int64_t e_a, int64_t e_b, int64_t bvc_ab);

// Runs alongside the two parties with full visibility into both, maintaining
// the mirrored simulation paths, the divergence measures, the potential and
// the collision/corruption counters. Purely observational: it never feeds
// anything back into the execution.
class GhostAnalyzer {
 public:
  GhostAnalyzer(const ProtocolDag& dag, const DerivedParams& dp);

  // Call once after every iteration (both parties just finished the same
  // compute segment).
  void after_iteration(const RobustParty& a, const RobustParty& b);

  // Call once after every block checkpoint exchange; verifies the potential
  // is untouched by chaining and harvests checkpoint-hash events.
  void after_block(const RobustParty& a, const RobustParty& b, int64_t block);

  const std::vector<GhostRow>& rows() const { return rows_; }
  int64_t ell_plus() const { return rows_.empty() ? 0 : rows_.back().ell_plus; }
  int64_t phi() const { return rows_.empty() ? 0 : rows_.back().phi; }

  int64_t small_collisions() const { return small_collisions_; }
  int64_t dangerous_small_collisions() const { return dangerous_small_collisions_; }
  int64_t big_collisions() const { return big_collisions_; }
  int64_t corrupted_iterations() const { return corrupted_iterations_; }
  int64_t corrupted_blocks() const { return corrupted_blocks_; }
  int64_t dangerous_iterations() const { return dangerous_iterations_; }
  int64_t upper_bound_breaches() const { return upper_bound_breaches_; }
  bool phi_block_stable() const { return phi_block_stable_; }

  // The bits each party would output: its recorded chunks in path order.
  Bits path_bits(Party p) const;

  void write_trace(std::ostream& out) const;

 private:
  struct PathEntry {
    Bits bits;
    int64_t iter = 0;
  };

  bool chunk_matches_oracle(const PathEntry& e, int64_t depth) const;
  std::optional<int64_t> divergence_point(const RobustParty& a, const RobustParty& b,
                                          int64_t& agreed_out) const;

  const ProtocolDag* dag_;
  const DerivedParams* dp_;
  Bits oracle_;  // noiseless transcript padded with zeros to i_exec chunks

  std::vector<PathEntry> path_a_, path_b_;
  int64_t bvc_a_ = 0, bvc_b_ = 0;
  int64_t l_minus_ = 0;

  std::vector<GhostRow> rows_;
  size_t big_seen_a_ = 0, big_seen_b_ = 0;
  std::map<std::string, Bits> big_registry_;

  int64_t small_collisions_ = 0;
  int64_t dangerous_small_collisions_ = 0;
  int64_t big_collisions_ = 0;
  int64_t corrupted_iterations_ = 0;
  int64_t corrupted_blocks_ = 0;
  int64_t dangerous_iterations_ = 0;
  int64_t upper_bound_breaches_ = 0;
  bool phi_block_stable_ = true;
};

// A reconstructed deep-rewind attack: the adversary stalls one party, walks
// the other past a forgotten meeting point, and later steers both to a joint
// rewind at scale w.
struct SneakyWindow {
  Party diver = Party::A;
  int64_t w = 0;
  int64_t p = 0;         // the joint rewind target
  int64_t t_dagger = 0;  // iteration of the joint jump
  int64_t t_p_hat = 0, t_cq = 0, t_q_hat = 0, t_b = 0;
  std::vector<int64_t> voting_window;
  std::vector<int64_t> diving_window;
};

// Scans a finished run for joint rewinds that close a divergence spell and
// match the staged-dive shape above. Throws if two reconstructed attacks
// overlap, which the combinatorics rule out.
std::vector<SneakyWindow> detect_sneaky_windows(const std::vector<GhostRow>& rows,
                                                int64_t c_star = kCStar);

}  // namespace nd
