#include "noisydialog/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "noisydialog/attacks.hpp"
#include "noisydialog/ecc.hpp"
#include "noisydialog/hash.hpp"
#include "noisydialog/meeting.hpp"

namespace nd {
namespace {

uint64_t mix_seed(uint64_t base, uint64_t salt) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec,
                                          const DerivedParams& dp) {
  if (spec.kind == "noise_free") return make_noise_free();
  if (spec.kind == "random_flip") return make_random_flip(spec.flip_p);
  if (spec.kind == "burst") return make_burst(spec.burst_start, spec.burst_len);
  if (spec.kind == "greedy_desync") return make_greedy_desync();
  if (spec.kind == "figure1_attack") return make_figure1_attack(dp);
  if (spec.kind == "sneaky_attack") return make_sneaky_attack(dp);
  throw std::invalid_argument("unknown adversary: " + spec.kind);
}

template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  int nw = std::max(1, std::min(workers, n));
  if (nw <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nw));
  for (int i = 0; i < nw; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
}

}  // namespace

AdversarySpec AdversarySpec::parse(const std::string& text) {
  AdversarySpec spec;
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  spec.kind = parts[0];
  if (spec.kind == "random_flip" && parts.size() > 1) spec.flip_p = std::stod(parts[1]);
  if (spec.kind == "burst") {
    if (parts.size() > 1) spec.burst_start = std::stoll(parts[1]);
    if (parts.size() > 2) spec.burst_len = std::stoll(parts[2]);
  }
  return spec;
}

TrialResult run_single(const ProtocolDag& dag, const RunConfig& cfg, const RunOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  DerivedParams dp = derive_params(cfg, dag.s);
  std::unique_ptr<Adversary> adv = make_adversary(opts.adversary, dp);
  Channel channel(*adv, Budget{dp.flip_budget, 0, 0}, mix_seed(cfg.seed, 0xC),
                  opts.channel_log);
  RobustParty a(dag, dp, cfg, Party::A, mix_seed(cfg.seed, 0xA));
  RobustParty b(dag, dp, cfg, Party::B, mix_seed(cfg.seed, 0xB));
  GhostAnalyzer ghost(dag, dp);

  std::vector<int64_t> flips(static_cast<size_t>(dp.i_exec) + 1, 0);
  int64_t peak_a = measure_memory_bits(a, dp);
  int64_t peak_b = measure_memory_bits(b, dp);

  const std::vector<Segment> segs = block_segments(dp);
  int64_t iter_global = 0;
  SegmentInfo si;
  for (int64_t blk = 0; blk < dp.b_total; ++blk) {
    for (const Segment& s : segs) {
      if (s.kind == SegmentKind::kIterSeed) ++iter_global;
      bool iter_level = s.kind == SegmentKind::kIterSeed ||
                        s.kind == SegmentKind::kVerify ||
                        s.kind == SegmentKind::kCompute;
      si.kind = s.kind;
      si.block = blk;
      si.iter_global = iter_level ? iter_global : 0;
      si.slot = s.slot;
      si.sender = s.sender;
      si.len = s.len;
      for (int64_t pos = 0; pos < s.len; ++pos) {
        si.pos = pos;
        RoundAction act_a = a.act(si);
        RoundAction act_b = b.act(si);
        DeliveredRound dr = channel.exchange(si, act_a, act_b, &a, &b);
        a.hear(si, dr.to_a);
        b.hear(si, dr.to_b);
        if (dr.cost > 0) flips[static_cast<size_t>(si.iter_global)] += dr.cost;
      }
      if (s.kind == SegmentKind::kCompute) {
        ghost.after_iteration(a, b);
        peak_a = std::max(peak_a, measure_memory_bits(a, dp));
        peak_b = std::max(peak_b, measure_memory_bits(b, dp));
      } else if (s.kind == SegmentKind::kBigHashB) {
        ghost.after_block(a, b, blk);
      }
    }
  }

  TrialResult tr;
  tr.seed = cfg.seed;
  tr.total_rounds = channel.rounds();
  tr.overhead = static_cast<double>(tr.total_rounds) / static_cast<double>(dp.d) - 1.0;
  tr.peak_memory_bits_a = peak_a;
  tr.peak_memory_bits_b = peak_b;
  tr.jumps = a.jumps() + b.jumps();
  tr.error_resets = a.error_resets() + b.error_resets();
  tr.dangerous_iterations = ghost.dangerous_iterations();
  tr.small_collisions = ghost.small_collisions();
  tr.big_collisions = ghost.big_collisions();
  tr.corrupted_iterations = ghost.corrupted_iterations();
  tr.corrupted_blocks = ghost.corrupted_blocks();
  tr.budget_limit = channel.budget().limit;
  tr.budget_spent = channel.budget().spent;
  tr.budget_denied = channel.budget().denied;
  tr.ell_plus = ghost.ell_plus();
  tr.phi = ghost.phi();
  tr.phi_block_stable = ghost.phi_block_stable();
  tr.upper_bound_breaches = ghost.upper_bound_breaches();
  tr.success = tr.ell_plus >= dp.progress_target;

  for (const RobustParty* p : {&a, &b}) {
    for (const IterationRecord& r : p->records()) {
      if (r.jumped) tr.max_rewind = std::max(tr.max_rewind, r.depth_entry - r.jump_target);
    }
  }

  if (auto* scripted = dynamic_cast<ScriptedAttack*>(adv.get())) {
    tr.attack_completed = scripted->completed();
    tr.attack_degraded = scripted->degraded();
  } else {
    tr.attack_completed = true;
  }

  std::vector<SneakyWindow> windows;
  bool overlap = false;
  if (opts.adversary.kind == "sneaky_attack") {
    try {
      windows = detect_sneaky_windows(ghost.rows());
    } catch (const std::exception&) {
      overlap = true;
    }
    tr.sneaky_windows = static_cast<int64_t>(windows.size());
    tr.windows_disjoint = !overlap;
  }

  if (opts.ghost_trace != nullptr) ghost.write_trace(*opts.ghost_trace);
  if (opts.probe != nullptr) {
    opts.probe->rows = ghost.rows();
    opts.probe->flips_per_iter = std::move(flips);
    opts.probe->windows = std::move(windows);
    opts.probe->windows_overlap = overlap;
    opts.probe->path_a = ghost.path_bits(Party::A);
    opts.probe->path_b = ghost.path_bits(Party::B);
  }

  auto t1 = std::chrono::steady_clock::now();
  tr.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return tr;
}

TrialResult run_one_config(const RunConfig& cfg, const AdversarySpec& adv, RunProbe* probe) {
  ProtocolDag dag =
      build_random_dag(cfg.depth, cfg.state_budget, mix_seed(cfg.seed, 0xDA6));
  RunOptions opts;
  opts.adversary = adv;
  opts.probe = probe;
  return run_single(dag, cfg, opts);
}

std::vector<TrialResult> run_trials(const ProtocolDag& dag, const RunConfig& cfg,
                                    const AdversarySpec& adv, int trials, int workers) {
  std::vector<TrialResult> out(static_cast<size_t>(std::max(0, trials)));
  parallel_for(trials, workers, [&](int t) {
    RunConfig c = cfg;
    c.seed = cfg.seed + static_cast<uint64_t>(t);
    RunOptions opts;
    opts.adversary = adv;
    out[static_cast<size_t>(t)] = run_single(dag, c, opts);
  });
  return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& results) {
  out << "v,trial,seed,success,total_rounds,overhead,peak_memory_bits_a,peak_memory_bits_b,"
         "jumps,error_resets,dangerous_iterations,small_collisions,big_collisions,"
         "corrupted_iterations,corrupted_blocks,budget_limit,budget_spent,budget_denied,"
         "ell_plus,phi,phi_block_stable,upper_bound_breaches,max_rewind,attack_completed,"
         "attack_degraded,sneaky_windows,windows_disjoint,wall_ms\n";
  for (size_t i = 0; i < results.size(); ++i) {
    const TrialResult& r = results[i];
    out << 1 << ',' << i << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
        << r.total_rounds << ',' << r.overhead << ',' << r.peak_memory_bits_a << ','
        << r.peak_memory_bits_b << ',' << r.jumps << ',' << r.error_resets << ','
        << r.dangerous_iterations << ',' << r.small_collisions << ',' << r.big_collisions
        << ',' << r.corrupted_iterations << ',' << r.corrupted_blocks << ','
        << r.budget_limit << ',' << r.budget_spent << ',' << r.budget_denied << ','
        << r.ell_plus << ',' << r.phi << ',' << (r.phi_block_stable ? 1 : 0) << ','
        << r.upper_bound_breaches << ',' << r.max_rewind << ','
        << (r.attack_completed ? 1 : 0) << ',' << (r.attack_degraded ? 1 : 0) << ','
        << r.sneaky_windows << ',' << (r.windows_disjoint ? 1 : 0) << ',' << r.wall_ms
        << '\n';
  }
}

void write_aggregate_json(std::ostream& out, const RunConfig& cfg,
                          const std::string& adversary,
                          const std::vector<TrialResult>& results) {
  nlohmann::json j;
  j["v"] = 1;
  j["adversary"] = adversary;
  j["epsilon"] = cfg.epsilon;
  j["depth"] = cfg.depth;
  j["states"] = cfg.state_budget;
  j["mp3_enabled"] = cfg.mp3_enabled;
  j["seed"] = cfg.seed;
  j["trials"] = results.size();

  int successes = 0;
  double overhead_sum = 0;
  double rounds_sum = 0;
  double spent_sum = 0;
  std::vector<int64_t> peaks;
  peaks.reserve(results.size());
  for (const TrialResult& r : results) {
    successes += r.success ? 1 : 0;
    overhead_sum += r.overhead;
    rounds_sum += static_cast<double>(r.total_rounds);
    spent_sum += static_cast<double>(r.budget_spent);
    peaks.push_back(std::max(r.peak_memory_bits_a, r.peak_memory_bits_b));
  }
  size_t n = results.size();
  j["successes"] = successes;
  j["success_rate"] = n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n);
  j["mean_overhead"] = n == 0 ? 0.0 : overhead_sum / static_cast<double>(n);
  j["mean_total_rounds"] = n == 0 ? 0.0 : rounds_sum / static_cast<double>(n);
  j["mean_budget_spent"] = n == 0 ? 0.0 : spent_sum / static_cast<double>(n);
  if (!peaks.empty()) {
    std::sort(peaks.begin(), peaks.end());
    j["max_peak_memory_bits"] = peaks.back();
    size_t idx = (peaks.size() * 95 + 99) / 100;
    j["p95_peak_memory_bits"] = peaks[std::min(peaks.size() - 1, idx == 0 ? 0 : idx - 1)];
  }
  j["budget_limit"] = results.empty() ? 0 : results.front().budget_limit;
  out << j.dump(2) << '\n';
}

PairedAttackReport figure1_experiment(const RunConfig& cfg, int trials, int workers) {
  PairedAttackReport rep;
  rep.pairs = trials;
  rep.on.resize(static_cast<size_t>(trials));
  rep.off.resize(static_cast<size_t>(trials));
  AdversarySpec spec;
  spec.kind = "figure1_attack";
  parallel_for(trials, workers, [&](int t) {
    RunConfig c = cfg;
    c.seed = cfg.seed + static_cast<uint64_t>(t);
    c.mp3_enabled = true;
    rep.on[static_cast<size_t>(t)] = run_one_config(c, spec);
    c.mp3_enabled = false;
    rep.off[static_cast<size_t>(t)] = run_one_config(c, spec);
  });
  for (int t = 0; t < trials; ++t) {
    rep.successes_on += rep.on[static_cast<size_t>(t)].success ? 1 : 0;
    rep.successes_off += rep.off[static_cast<size_t>(t)].success ? 1 : 0;
    int64_t won = rep.on[static_cast<size_t>(t)].max_rewind;
    int64_t woff = rep.off[static_cast<size_t>(t)].max_rewind;
    if (woff > won) {
      ++rep.rewind_larger_off;
    } else if (won > woff) {
      ++rep.rewind_larger_on;
    } else {
      ++rep.rewind_ties;
    }
  }
  int informative = rep.rewind_larger_off + rep.rewind_larger_on;
  rep.sign_test_p = binomial_one_sided_p(informative, rep.rewind_larger_off);
  return rep;
}

double binomial_one_sided_p(int n, int k) {
  if (n <= 0 || k <= 0) return 1.0;
  if (k > n) return 0.0;
  long double scale = std::pow(0.5L, static_cast<long double>(n));
  long double coeff = 1.0L;
  long double tail = 0.0L;
  for (int i = 0; i <= n; ++i) {
    if (i >= k) tail += coeff;
    coeff = coeff * static_cast<long double>(n - i) / static_cast<long double>(i + 1);
  }
  return static_cast<double>(tail * scale);
}

void write_hash_vectors(std::ostream& out) {
  RunConfig cfg;
  DerivedParams dp = derive_params(cfg, cfg.state_budget);
  std::mt19937_64 rng(0x5eedf00dULL);

  for (int i = 0; i < 8; ++i) {
    Bits x = random_bits(static_cast<size_t>(48 + 71 * i), rng);
    Bits seed = random_bits(static_cast<size_t>(dp.small_outer.sd()), rng);
    out << "pairwise_hash/" << i << ' ' << to_hex(pairwise_hash(x, seed, dp.small_outer))
        << '\n';
  }
  for (int i = 0; i < 8; ++i) {
    Bits x = random_bits(static_cast<size_t>(100 + 53 * i), rng);
    Bits r_iter = random_bits(static_cast<size_t>(dp.small_inner.sd()), rng);
    Bits chunk = random_bits(static_cast<size_t>(dp.small_outer.sd()), rng);
    out << "small_hash/" << i << ' '
        << to_hex(small_hash(x, r_iter, chunk, dp.small_outer, dp.small_inner)) << '\n';
  }
  const int big_lens[4] = {dp.t3 / 4, dp.t3 / 2, dp.t3 - 1, dp.t3};
  for (int i = 0; i < 4; ++i) {
    Bits payload = random_bits(static_cast<size_t>(big_lens[i]), rng);
    Bits seed = random_bits(static_cast<size_t>(dp.big.sd()), rng);
    out << "big_hash/" << i << ' ' << to_hex(big_hash(payload, seed, dp.big)) << '\n';
  }
  {
    Bits seed = random_bits(static_cast<size_t>(dp.pse.seed_len()), rng);
    Bits prefix;
    for (size_t idx = 0; idx < 64; ++idx) prefix.push_back(extend_bit(seed, idx, dp.pse));
    out << "extend_prefix/0 " << to_hex(prefix) << '\n';
    Bits tail;
    for (size_t idx = dp.pse.target_len - 32; idx < dp.pse.target_len; ++idx) {
      tail.push_back(extend_bit(seed, idx, dp.pse));
    }
    out << "extend_tail/0 " << to_hex(tail) << '\n';
  }
  for (int i = 0; i < 2; ++i) {
    Bits msg = random_bits(static_cast<size_t>(dp.ecc_seed.msg_len), rng);
    out << "ecc_seed/" << i << ' ' << to_hex(ecc_encode(msg, dp.ecc_seed)) << '\n';
  }
  for (int i = 0; i < 2; ++i) {
    Bits msg = random_bits(static_cast<size_t>(dp.ecc_bh.msg_len), rng);
    out << "ecc_block/" << i << ' ' << to_hex(ecc_encode(msg, dp.ecc_bh)) << '\n';
  }
}

std::vector<std::string> selftest_meeting_points(int64_t p_max, int64_t a_max,
                                                 int64_t ell_max, int64_t j_max, int walks,
                                                 uint64_t seed) {
  std::vector<std::string> fails;

  // Membership interval: each positive p with stability j appears in
  // mp_set(a) exactly for a in [p, p + 2^(j+1) - 1].
  {
    std::vector<int64_t> count(static_cast<size_t>(p_max) + 1, 0);
    std::vector<int64_t> lo(static_cast<size_t>(p_max) + 1,
                            std::numeric_limits<int64_t>::max());
    std::vector<int64_t> hi(static_cast<size_t>(p_max) + 1, -1);
    // Retention keeps mp_set(a) plus the current point itself, so the
    // membership set under test is the augmented one.
    for (int64_t a = 0; a <= a_max; ++a) {
      std::set<int64_t> members = mp_set(a);
      members.insert(a);
      for (int64_t q : members) {
        if (q < 1 || q > p_max) continue;
        ++count[static_cast<size_t>(q)];
        lo[static_cast<size_t>(q)] = std::min(lo[static_cast<size_t>(q)], a);
        hi[static_cast<size_t>(q)] = std::max(hi[static_cast<size_t>(q)], a);
      }
    }
    for (int64_t p = 1; p <= p_max; ++p) {
      int64_t j = j_stable(p);
      int64_t want_lo = p;
      int64_t want_hi = std::min(a_max, p + (int64_t{1} << (j + 1)) - 1);
      int64_t want_count = want_hi - want_lo + 1;
      if (count[static_cast<size_t>(p)] != want_count ||
          lo[static_cast<size_t>(p)] != want_lo || hi[static_cast<size_t>(p)] != want_hi) {
        fails.push_back("membership interval broken at p=" + std::to_string(p));
      }
    }
  }

  // Common candidate: advancing the deeper side by at most 2^(j-3) keeps its
  // first-formula candidate among the shallower side's first two.
  {
    auto mp1 = [](int64_t j, int64_t ell) {
      int64_t m = int64_t{1} << (j + 1);
      return floor_mult(ell, m) - m;
    };
    auto mp2 = [](int64_t j, int64_t ell) {
      int64_t m = int64_t{1} << j;
      return floor_mult(ell, m) - m;
    };
    for (int64_t j = 0; j <= j_max; ++j) {
      int64_t span = j >= 3 ? (int64_t{1} << (j - 3)) : 0;
      for (int64_t lb = 0; lb <= ell_max; ++lb) {
        int64_t top = std::min(ell_max, lb + span);
        for (int64_t la = lb; la <= top; ++la) {
          int64_t got = mp1(j, la);
          if (got != mp1(j, lb) && got != mp2(j, lb)) {
            fails.push_back("common candidate broken at j=" + std::to_string(j) +
                            " ell_b=" + std::to_string(lb) +
                            " ell_a=" + std::to_string(la));
          }
        }
      }
    }
  }

  // Retention walks: the store must equal the history oracle (a point lives
  // from its latest insertion until the depth first leaves [p, p + 2^(j+1))),
  // and any jump below a forgotten scale must land at or under the forgotten
  // point.
  {
    std::mt19937_64 rng(seed);
    for (int wk = 0; wk < walks && fails.size() < 16; ++wk) {
      MemoryStore store;
      MegaState root;
      store.maintain_avmps(root, 0, true);
      int64_t depth = 0;
      std::map<int64_t, int64_t> alive;  // point -> latest insertion step
      alive[0] = 0;
      std::set<int64_t> forgotten;
      int steps = 200 + static_cast<int>(rng() % 200);
      for (int st = 1; st <= steps; ++st) {
        std::vector<int64_t> before = store.points();
        bool jumped = false;
        if (before.size() >= 2 && rng() % 10 < 3) {
          int64_t target =
              before[static_cast<size_t>(rng() % (before.size() - 1))];
          for (int64_t p : forgotten) {
            int64_t w = j_stable(p);
            if (w < 62 && target < p + (int64_t{1} << w) && target > p) {
              fails.push_back("jump into a forgotten scale: target=" +
                              std::to_string(target) + " p=" + std::to_string(p));
            }
          }
          MegaState ms = store.at(target);
          store.maintain_avmps(ms, target, false);
          depth = target;
          jumped = true;
        }
        if (!jumped) {
          ++depth;
          MegaState ms;
          ms.depth = depth;
          ms.iter = st;
          store.maintain_avmps(ms, depth, true);
        }
        for (auto it = alive.begin(); it != alive.end();) {
          int64_t p = it->first;
          if (p == 0) {
            ++it;
            continue;
          }
          int64_t j = j_stable(p);
          bool dead = depth < p || (j < 62 && depth >= p + (int64_t{1} << (j + 1)));
          it = dead ? alive.erase(it) : std::next(it);
        }
        alive[depth] = st;
        std::vector<int64_t> now = store.points();
        std::vector<int64_t> want;
        want.reserve(alive.size());
        for (const auto& [p, when] : alive) want.push_back(p);
        if (now != want) {
          fails.push_back("retention mismatch at walk=" + std::to_string(wk) +
                          " step=" + std::to_string(st));
          break;
        }
        for (int64_t p : before) {
          if (p >= 1 && !store.contains(p)) forgotten.insert(p);
        }
        for (auto it = forgotten.begin(); it != forgotten.end();) {
          it = store.contains(*it) ? forgotten.erase(it) : std::next(it);
        }
      }
    }
  }

  return fails;
}

}  // namespace nd
