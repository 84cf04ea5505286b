#include "noisydialog/meeting.hpp"

#include <cassert>
#include <stdexcept>

namespace nd {

int64_t floor_mult(int64_t x, int64_t y) {
  if (x < 0 || y < 1) throw std::invalid_argument("floor_mult domain");
  return x - x % y;
}

std::set<int64_t> mp_set(int64_t a) {
  std::set<int64_t> out;
  if (a <= 0) return out;
  for (int64_t j = 0; (int64_t(1) << j) <= 2 * a; ++j) {
    int64_t b = floor_mult(a, int64_t(1) << j) - (int64_t(1) << j);
    if (b >= 0) out.insert(b);
  }
  return out;
}

int64_t j_stable(int64_t p) {
  if (p < 0) throw std::invalid_argument("j_stable domain");
  if (p == 0) return kJStableMax;
  int64_t j = 0;
  while ((p & 1) == 0) {
    ++j;
    p >>= 1;
  }
  return j;
}

CandidateTriple transition_candidates(int64_t j, int64_t ell) {
  if (j < 0 || ell < 0) throw std::invalid_argument("transition_candidates domain");
  CandidateTriple out;
  if (j + 1 < 62) {
    int64_t w = int64_t(1) << (j + 1);
    int64_t mp1 = floor_mult(ell, w) - w;
    if (mp1 >= 0) out.mp1 = mp1;
  }
  if (j < 62) {
    int64_t w = int64_t(1) << j;
    int64_t mp2 = floor_mult(ell, w) - w;
    if (mp2 >= 0) out.mp2 = mp2;
  }
  int64_t best = -1;
  for (int64_t p : mp_set(ell)) {
    if (j < 62 && p % (int64_t(1) << j) == 0 && p > best) best = p;
  }
  if (best >= 0) out.mp3 = best;
  return out;
}

void MemoryStore::maintain_avmps(const MegaState& p, int64_t a, bool add) {
  if (a < 0) throw std::invalid_argument("maintain_avmps negative depth");
  std::set<int64_t> keep = mp_set(a);
  keep.insert(a);
  for (auto it = mega_.begin(); it != mega_.end();) {
    if (keep.count(it->first) == 0) {
      it = mega_.erase(it);
    } else {
      ++it;
    }
  }
  if (add) {
    assert(p.depth == a);
    mega_[a] = p;
  } else {
    // Rewinding to a point requires it to still be stored.
    assert(mega_.count(a) != 0);
  }
}

std::vector<int64_t> MemoryStore::points() const {
  std::vector<int64_t> out;
  out.reserve(mega_.size());
  for (const auto& [depth, ms] : mega_) out.push_back(depth);
  return out;
}

std::optional<int64_t> MemoryStore::deepest_divisible(int64_t j, int64_t ell) const {
  if (j >= 62) return std::nullopt;
  int64_t w = int64_t(1) << j;
  std::optional<int64_t> best;
  for (const auto& [depth, ms] : mega_) {
    if (depth <= ell && depth % w == 0) {
      if (!best || depth > *best) best = depth;
    }
  }
  return best;
}

}  // namespace nd
