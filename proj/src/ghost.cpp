#include "noisydialog/ghost.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace nd {

namespace {

// What the vote line would conclude with perfect hashes: the depth payload
// must agree at the same slot, the state and checkpoint payloads may match
// under any of the counterpart's candidates. Mirroring the positional
// structure exactly means honest exchanges always agree with the actual vote
// and only corruption or a hash collision can drive the two apart.
bool candidate_member(const IterationRecord& mine, const IterationRecord& theirs, int i) {
  if (mine.slot_payload[5 + 3 * i] != theirs.slot_payload[5 + 3 * i]) return false;
  for (int jp = 0; jp < 3; ++jp) {
    if (mine.slot_payload[3 + 3 * i] == theirs.slot_payload[3 + 3 * jp] &&
        mine.slot_payload[4 + 3 * i] == theirs.slot_payload[4 + 3 * jp])
      return true;
  }
  return false;
}

bool contains_point(const std::vector<int64_t>& points, int64_t x) {
  return std::find(points.begin(), points.end(), x) != points.end();
}

}  // namespace

int64_t phi_value(int64_t ell_plus, int64_t ell_minus, int64_t l_minus, int64_t k_a,
                  int64_t k_b, int64_t e_a, int64_t e_b, int64_t bvc_ab) {
  int64_t k_ab = k_a + k_b;
  int64_t e_ab = e_a + e_b;
  if (k_a == k_b)
    return ell_plus + kC1 * k_ab - kC3 * ell_minus - kC2 * l_minus - kC5 * e_ab -
           2 * kC6 * bvc_ab;
  return ell_plus - kC3 * ell_minus - kC2 * l_minus - (9 * kC4 / 10) * k_ab +
         kC4 * e_ab - kC6 * bvc_ab;
}

GhostAnalyzer::GhostAnalyzer(const ProtocolDag& dag, const DerivedParams& dp)
    : dag_(&dag), dp_(&dp) {
  oracle_ = noiseless_run(dag);
  oracle_.resize(static_cast<size_t>(dp.i_exec * dp.r), 0);
}

bool GhostAnalyzer::chunk_matches_oracle(const PathEntry& e, int64_t depth) const {
  size_t base = static_cast<size_t>(depth) * static_cast<size_t>(dp_->r);
  for (size_t i = 0; i < e.bits.size(); ++i)
    if (e.bits[i] != oracle_[base + i]) return false;
  return true;
}

void GhostAnalyzer::after_iteration(const RobustParty& a, const RobustParty& b) {
  const IterationRecord& ra = a.records().back();
  const IterationRecord& rb = b.records().back();
  if (ra.iter != rb.iter) throw std::logic_error("ghost: parties out of step");

  bool dangerous;
  if (rows_.empty()) {
    dangerous = false;
  } else {
    const GhostRow& prev = rows_.back();
    dangerous = prev.ell_minus > 0 || prev.k_a >= 1 || prev.k_b >= 1;
  }
  if (dangerous) ++dangerous_iterations_;

  bool corrupted = ra.chunk != rb.chunk || ra.r_iter != rb.r_iter;
  if (corrupted) ++corrupted_iterations_;

  auto apply = [](std::vector<PathEntry>& path, const IterationRecord& rec) {
    if (rec.simulated) path.push_back({rec.sim_chunk, rec.iter});
    if (rec.jumped) path.resize(static_cast<size_t>(rec.jump_target));
    if (path.size() != static_cast<size_t>(rec.depth_exit))
      throw std::logic_error("ghost: mirrored path desynced from party depth");
  };
  apply(path_a_, ra);
  apply(path_b_, rb);

  int64_t ell_a = static_cast<int64_t>(path_a_.size());
  int64_t ell_b = static_cast<int64_t>(path_b_.size());
  int64_t ell_plus = 0;
  while (ell_plus < std::min(ell_a, ell_b)) {
    if (!chunk_matches_oracle(path_a_[static_cast<size_t>(ell_plus)], ell_plus)) break;
    if (!chunk_matches_oracle(path_b_[static_cast<size_t>(ell_plus)], ell_plus)) break;
    ++ell_plus;
  }
  int64_t ell_minus = ell_a + ell_b - 2 * ell_plus;
  l_minus_ = ell_minus == 0 ? 0 : std::max(l_minus_, ell_minus);

  int64_t agreed = 0;
  while (agreed < std::min(ell_a, ell_b)) {
    const PathEntry& ea = path_a_[static_cast<size_t>(agreed)];
    const PathEntry& eb = path_b_[static_cast<size_t>(agreed)];
    if (ea.iter != eb.iter || ea.bits != eb.bits) break;
    ++agreed;
  }
  int64_t bad = std::numeric_limits<int64_t>::max();
  for (int64_t x : a.memory().points()) {
    if (!b.memory().contains(x)) continue;
    if (!(a.memory().at(x) == b.memory().at(x))) bad = std::min(bad, x - 1);
  }
  int64_t bval = std::min(agreed, bad);
  std::optional<int64_t> bpoint;
  if (!(ell_minus == 0 && ell_a == ell_b && bval == ell_a)) bpoint = bval;

  // Bad-vote accounting: only iterations whose vote-update line actually ran
  // can charge it, and any vote reset clears the tally afterwards.
  auto update_bvc = [](int64_t& bvc, const IterationRecord& mine,
                       const IterationRecord& theirs) {
    bool grew = false;
    if (mine.hk_match) {
      for (int i = 0; i < 3; ++i) {
        if (mine.vote_inc[i] != candidate_member(mine, theirs, i)) {
          ++bvc;
          grew = true;
          break;
        }
      }
    }
    if (mine.votes_reset) bvc = 0;
    return grew;
  };
  bool bvc_inc_a = update_bvc(bvc_a_, ra, rb);
  bool bvc_inc_b = update_bvc(bvc_b_, rb, ra);

  bool collision = false;
  auto check = [&](int sa, int sb) {
    if (ra.slot_hash[sa] == rb.slot_hash[sb] && ra.slot_payload[sa] != rb.slot_payload[sb])
      collision = true;
  };
  for (int s = 0; s < 3; ++s) check(s, s);
  for (int i = 0; i < 3; ++i) {
    for (int jp = 0; jp < 3; ++jp) {
      check(3 + 3 * i, 3 + 3 * jp);
      check(4 + 3 * i, 4 + 3 * jp);
    }
    check(5 + 3 * i, 5 + 3 * i);
  }
  if (collision) {
    ++small_collisions_;
    if (dangerous) ++dangerous_small_collisions_;
  }

  GhostRow row;
  row.iter = ra.iter;
  row.ell_a = ell_a;
  row.ell_b = ell_b;
  row.ell_plus = ell_plus;
  row.ell_minus = ell_minus;
  row.l_minus = l_minus_;
  row.b = bpoint;
  row.k_a = ra.k_exit;
  row.k_b = rb.k_exit;
  row.e_a = ra.e_exit;
  row.e_b = rb.e_exit;
  row.bvc_ab = bvc_a_ + bvc_b_;
  row.phi = phi_value(ell_plus, ell_minus, l_minus_, row.k_a, row.k_b, row.e_a, row.e_b,
                      row.bvc_ab);
  row.dangerous = dangerous;
  row.corrupted = corrupted;
  row.small_collision = collision;
  row.bvc_inc = bvc_inc_a || bvc_inc_b;
  if (ra.simulated) row.sim_depth_a = ra.depth_exit;
  if (rb.simulated) row.sim_depth_b = rb.depth_exit;
  if (ra.jumped) row.jump_a = ra.jump_target;
  if (rb.jumped) row.jump_b = rb.jump_target;
  row.votes_reset_a = ra.votes_reset;
  row.votes_reset_b = rb.votes_reset;
  row.mem_a = ra.mem_points;
  row.mem_b = rb.mem_points;

  int64_t slack = corrupted_iterations_ + corrupted_blocks_ + dangerous_small_collisions_ +
                  big_collisions_;
  if (row.phi > ell_plus + kCUpper * slack) ++upper_bound_breaches_;

  rows_.push_back(std::move(row));
}

void GhostAnalyzer::after_block(const RobustParty& a, const RobustParty& b, int64_t block) {
  auto harvest = [&](const std::vector<BigHashEvent>& events, size_t& seen) {
    for (; seen < events.size(); ++seen) {
      const BigHashEvent& ev = events[seen];
      std::string key = to_hex(ev.seed) + ":" + to_hex(ev.out);
      auto [it, inserted] = big_registry_.emplace(key, ev.payload);
      if (!inserted && it->second != ev.payload) ++big_collisions_;
    }
  };
  harvest(a.big_events(), big_seen_a_);
  harvest(b.big_events(), big_seen_b_);

  const BlockRandRecord& bra = a.block_rand().at(static_cast<size_t>(block));
  const BlockRandRecord& brb = b.block_rand().at(static_cast<size_t>(block));
  if (bra.pse_seed != brb.pse_seed || bra.r_b1 != brb.r_b1 || bra.r_b2 != brb.r_b2)
    ++corrupted_blocks_;

  if (rows_.empty()) return;
  int64_t ell_a = static_cast<int64_t>(path_a_.size());
  int64_t ell_b = static_cast<int64_t>(path_b_.size());
  int64_t ell_plus = 0;
  while (ell_plus < std::min(ell_a, ell_b)) {
    if (!chunk_matches_oracle(path_a_[static_cast<size_t>(ell_plus)], ell_plus)) break;
    if (!chunk_matches_oracle(path_b_[static_cast<size_t>(ell_plus)], ell_plus)) break;
    ++ell_plus;
  }
  int64_t recomputed =
      phi_value(ell_plus, ell_a + ell_b - 2 * ell_plus, l_minus_, a.k(), b.k(), a.e(),
                b.e(), bvc_a_ + bvc_b_);
  if (recomputed != rows_.back().phi) phi_block_stable_ = false;
}

Bits GhostAnalyzer::path_bits(Party p) const {
  const std::vector<PathEntry>& path = p == Party::A ? path_a_ : path_b_;
  Bits out;
  for (const PathEntry& e : path) append_bits(out, e.bits);
  return out;
}

void GhostAnalyzer::write_trace(std::ostream& out) const {
  out << "I,ell_plus,ell_minus,L_minus,b,k_A,k_B,E_A,E_B,BVC_AB,phi,dangerous,corrupted\n";
  for (const GhostRow& r : rows_) {
    out << r.iter << ',' << r.ell_plus << ',' << r.ell_minus << ',' << r.l_minus << ',';
    if (r.b)
      out << *r.b;
    else
      out << -1;
    out << ',' << r.k_a << ',' << r.k_b << ',' << r.e_a << ',' << r.e_b << ','
        << r.bvc_ab << ',' << r.phi << ',' << (r.dangerous ? 1 : 0) << ','
        << (r.corrupted ? 1 : 0) << "\n";
  }
}

namespace {

int64_t ell_of(const GhostRow& row, Party p) { return p == Party::A ? row.ell_a : row.ell_b; }

std::optional<int64_t> sim_of(const GhostRow& row, Party p) {
  return p == Party::A ? row.sim_depth_a : row.sim_depth_b;
}

std::optional<int64_t> jump_of(const GhostRow& row, Party p) {
  return p == Party::A ? row.jump_a : row.jump_b;
}

const std::vector<int64_t>& mem_of(const GhostRow& row, Party p) {
  return p == Party::A ? row.mem_a : row.mem_b;
}

// Tries to explain the joint jump at row t as a staged dive by `diver` at
// scale w. Returns the reconstructed window on success.
std::optional<SneakyWindow> match_window(const std::vector<GhostRow>& rows, size_t t,
                                         Party diver, int64_t w, int64_t c_star) {
  const GhostRow& row = rows[t];
  const GhostRow& prev = rows[t - 1];
  int64_t p = *jump_of(row, diver);
  int64_t k_entry = prev.k_a + 1;
  if (k_entry > (int64_t{1} << (w + 1))) return std::nullopt;

  int64_t ell_pre = ell_of(prev, diver);
  CandidateTriple ct = transition_candidates(w, ell_pre);
  bool p_fits = (ct.mp1 && *ct.mp1 == p) || (ct.mp2 && *ct.mp2 == p) ||
                (p >= 0 && p < ell_pre && p % (int64_t{1} << w) == 0 &&
                 contains_point(mem_of(prev, diver), p));
  if (!p_fits) return std::nullopt;

  int64_t p_hat = p + (int64_t{1} << w);
  int64_t q = p + (int64_t{1} << (w - 1));
  int64_t c_q = q + (int64_t{1} << w);
  Party other = diver == Party::A ? Party::B : Party::A;

  // forgotten natural meeting point
  if (contains_point(mem_of(prev, diver), q)) return std::nullopt;

  // last visit to the dive ceiling, then the dive floor before it
  int64_t t_cq = -1;
  for (int64_t x = static_cast<int64_t>(t) - 1; x >= 0; --x)
    if (ell_of(rows[static_cast<size_t>(x)], diver) == c_q) {
      t_cq = x;
      break;
    }
  if (t_cq < 0) return std::nullopt;
  int64_t t_p_hat = -1;
  for (int64_t x = t_cq - 1; x >= 0; --x)
    if (ell_of(rows[static_cast<size_t>(x)], diver) == p_hat) {
      t_p_hat = x;
      break;
    }
  if (t_p_hat < 0) return std::nullopt;

  // first full reconvergence after the dive must land both at p_hat
  int64_t t_q_hat = -1;
  for (int64_t x = t_cq + 1; x < static_cast<int64_t>(t); ++x)
    if (rows[static_cast<size_t>(x)].ell_minus == 0) {
      t_q_hat = x;
      break;
    }
  if (t_q_hat < 0) return std::nullopt;
  if (rows[static_cast<size_t>(t_q_hat)].ell_a != p_hat ||
      rows[static_cast<size_t>(t_q_hat)].ell_b != p_hat)
    return std::nullopt;

  // the other side's later rewind pins the divergence point until the end
  int64_t near = (int64_t{1} << w) >> c_star;
  int64_t t_b = -1;
  int64_t b_val = 0;
  for (int64_t x = static_cast<int64_t>(t) - 1; x > t_q_hat; --x) {
    auto jo = jump_of(rows[static_cast<size_t>(x)], other);
    if (jo && *jo >= p_hat - near) {
      t_b = x;
      b_val = *jo;
      break;
    }
  }
  if (t_b < 0) return std::nullopt;
  for (int64_t x = t_b; x < static_cast<int64_t>(t); ++x) {
    const GhostRow& r = rows[static_cast<size_t>(x)];
    if (!r.b || *r.b != b_val) return std::nullopt;
  }

  for (int64_t x = t_p_hat; x < t_b; ++x)
    if (ell_of(rows[static_cast<size_t>(x)], other) >= p_hat + near) return std::nullopt;
  if (ell_of(prev, other) >= p_hat + ((int64_t{1} << w) >> 2)) return std::nullopt;

  // lockstep vote window with no counter reset inside
  if (static_cast<int64_t>(t) - k_entry + 1 < 0) return std::nullopt;
  for (int64_t x = static_cast<int64_t>(t) - k_entry + 1; x < static_cast<int64_t>(t);
       ++x) {
    const GhostRow& r = rows[static_cast<size_t>(x)];
    int64_t expect = k_entry - (static_cast<int64_t>(t) - x);
    if (r.k_a != expect || r.k_b != expect) return std::nullopt;
  }

  // the dive itself: last simulation of each depth between p_hat and c_q
  std::vector<int64_t> diving;
  for (int64_t depth = p_hat + 1; depth <= c_q; ++depth) {
    int64_t found = -1;
    for (int64_t x = t_cq; x >= t_p_hat; --x) {
      const GhostRow& r = rows[static_cast<size_t>(x)];
      auto sd = sim_of(r, diver);
      if (sd && *sd == depth && r.ell_minus > 0) {
        found = x;
        break;
      }
    }
    if (found < 0) return std::nullopt;
    diving.push_back(rows[static_cast<size_t>(found)].iter);
  }
  if (static_cast<int64_t>(diving.size()) != (int64_t{1} << (w - 1))) return std::nullopt;

  SneakyWindow win;
  win.diver = diver;
  win.w = w;
  win.p = p;
  win.t_dagger = row.iter;
  win.t_p_hat = rows[static_cast<size_t>(t_p_hat)].iter;
  win.t_cq = rows[static_cast<size_t>(t_cq)].iter;
  win.t_q_hat = rows[static_cast<size_t>(t_q_hat)].iter;
  win.t_b = rows[static_cast<size_t>(t_b)].iter;
  for (int64_t x = static_cast<int64_t>(t) - k_entry + 1; x <= static_cast<int64_t>(t);
       ++x)
    win.voting_window.push_back(rows[static_cast<size_t>(x)].iter);
  std::sort(diving.begin(), diving.end());
  win.diving_window = std::move(diving);
  return win;
}

}  // namespace

std::vector<SneakyWindow> detect_sneaky_windows(const std::vector<GhostRow>& rows,
                                                int64_t c_star) {
  std::vector<SneakyWindow> out;
  for (size_t t = 1; t < rows.size(); ++t) {
    const GhostRow& row = rows[t];
    if (!row.jump_a || !row.jump_b || *row.jump_a != *row.jump_b) continue;
    if (row.ell_minus != 0) continue;
    const GhostRow& prev = rows[t - 1];
    if (prev.ell_minus <= 0) continue;
    if (prev.k_a != prev.k_b) continue;

    bool matched = false;
    for (int64_t w = 1; w <= 34 && !matched; ++w) {
      for (Party diver : {Party::A, Party::B}) {
        auto win = match_window(rows, t, diver, w, c_star);
        if (win) {
          out.push_back(std::move(*win));
          matched = true;
          break;
        }
      }
    }
  }

  for (size_t i = 0; i < out.size(); ++i) {
    for (size_t j = i + 1; j < out.size(); ++j) {
      auto overlap = [](const std::vector<int64_t>& xs, const std::vector<int64_t>& ys) {
        for (int64_t x : xs)
          for (int64_t y : ys)
            if (x == y) return true;
        return false;
      };
      std::vector<int64_t> wi = out[i].voting_window;
      wi.insert(wi.end(), out[i].diving_window.begin(), out[i].diving_window.end());
      std::vector<int64_t> wj = out[j].voting_window;
      wj.insert(wj.end(), out[j].diving_window.begin(), out[j].diving_window.end());
      if (overlap(wi, wj))
        throw std::runtime_error("detect_sneaky_windows: overlapping attack windows");
    }
  }
  return out;
}

}  // namespace nd
