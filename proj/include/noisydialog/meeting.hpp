#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "noisydialog/bits.hpp"

namespace nd {

// Depths here are measured in iterations (chunks of r protocol rounds).

// Largest multiple of y that is <= x.
int64_t floor_mult(int64_t x, int64_t y);

// The set of rewind targets of depth a: all b >= 0 with
// floor_mult(a, 2^j) - 2^j == b for some j >= 0. Empty for a == 0.
std::set<int64_t> mp_set(int64_t a);

// Number of trailing zero bits of p (largest j with 2^j | p). Returns
// INT64_MAX for p == 0.
int64_t j_stable(int64_t p);
inline constexpr int64_t kJStableMax = std::numeric_limits<int64_t>::max();

struct CandidateTriple {
  std::optional<int64_t> mp1;
  std::optional<int64_t> mp2;
  std::optional<int64_t> mp3;
};

// Scale-j rewind candidates from depth ell. mp1/mp2 come from the fixed
// formulas (None when negative); mp3 is the deepest element of mp_set(ell)
// divisible by 2^j (None when the set is empty). Whether a candidate is
// actually usable additionally requires the party to still remember it.
CandidateTriple transition_candidates(int64_t j, int64_t ell);

// A remembered simulation checkpoint. depth counts iterations, so the
// underlying protocol state v sits at depth*r rounds. prev_hash/prev_seed
// form the chained tamper-evidence carried across blocks; both unset until
// the checkpoint's first block boundary.
struct MegaState {
  uint32_t v = 0;
  int64_t depth = 0;
  int64_t iter = 0;
  std::optional<Bits> prev_hash;
  std::optional<Bits> prev_seed;

  bool operator==(const MegaState& other) const = default;
};

// The bounded checkpoint memory: a set of depths plus the checkpoint stored
// at each depth.
class MemoryStore {
 public:
  // Applies the retention rule for a move to depth a: the retained point set
  // becomes (points intersect mp_set(a)) union {a}; checkpoints at dropped
  // points are deleted. With add set, a copy of p (which must have depth a)
  // is stored at a, overwriting any previous checkpoint there. With add
  // unset, a must already be stored (a rewind target never forgotten).
  void maintain_avmps(const MegaState& p, int64_t a, bool add);

  bool contains(int64_t depth) const { return mega_.count(depth) != 0; }
  const MegaState& at(int64_t depth) const { return mega_.at(depth); }
  MegaState& at(int64_t depth) { return mega_.at(depth); }
  size_t size() const { return mega_.size(); }

  std::vector<int64_t> points() const;

  // Deepest stored point <= ell divisible by 2^j, if any.
  std::optional<int64_t> deepest_divisible(int64_t j, int64_t ell) const;

  template <typename Fn>
  void for_each(Fn&& fn) {
    for (auto& [depth, ms] : mega_) fn(depth, ms);
  }

 private:
  std::map<int64_t, MegaState> mega_;
};

}  // namespace nd
