#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "noisydialog/bits.hpp"

namespace nd {

enum class Party : uint8_t { A, B };

inline Party other(Party p) { return p == Party::A ? Party::B : Party::A; }
inline char party_char(Party p) { return p == Party::A ? 'A' : 'B'; }

// The underlying two-party protocol as a rooted layered DAG. Every
// non-terminal node is owned by one party, carries the bit that party
// transmits there, and has a child for each bit the listener might hear.
struct DagNode {
  Party owner = Party::A;
  int64_t depth = 0;
  int32_t child[2] = {-1, -1};  // -1 marks a terminal
  uint8_t tbit = 0;
};

struct ProtocolDag {
  std::vector<DagNode> nodes;
  int32_t root = 0;
  int64_t d = 0;  // rounds to reach a terminal from the root
  int64_t s = 0;  // state count

  bool is_terminal(int32_t id) const { return nodes[static_cast<size_t>(id)].child[0] < 0; }
  const DagNode& node(int32_t id) const { return nodes[static_cast<size_t>(id)]; }
};

// Deterministic layered generator. Both parties own nodes in every window of
// four consecutive depths unless single_owner forces one party everywhere.
ProtocolDag build_random_dag(int64_t depth, int64_t state_budget, uint64_t rng_seed,
                             bool single_owner = false);

void validate_dag(const ProtocolDag& dag);

// The transcript produced with no interference: walk from the root taking
// each owner's transmitted bit.
Bits noiseless_run(const ProtocolDag& dag);
std::vector<int32_t> noiseless_states(const ProtocolDag& dag);

// Steps one party's view of the protocol one round at a time. Terminal nodes
// behave as padding: party A transmits 0 and nobody moves, which also covers
// depths past d when the iteration schedule overshoots.
class SimStepper {
 public:
  SimStepper(const ProtocolDag& dag, int32_t start, Party role)
      : dag_(&dag), node_(start), role_(role) {}

  bool speaking() const {
    if (dag_->is_terminal(node_)) return role_ == Party::A;
    return dag_->node(node_).owner == role_;
  }
  uint8_t out_bit() const {
    if (dag_->is_terminal(node_)) return 0;
    return dag_->node(node_).tbit;
  }
  // Advances along the bit this party sent or heard this round.
  void step(uint8_t bit) {
    if (dag_->is_terminal(node_)) return;
    node_ = dag_->node(node_).child[bit & 1];
  }
  int32_t node() const { return node_; }

 private:
  const ProtocolDag* dag_;
  int32_t node_;
  Party role_;
};

// Batch wrapper over SimStepper matching the hook-style interface: send is
// called with each bit this party transmits, recv supplies each heard bit.
struct SimResult {
  Bits bits;
  int32_t state = 0;
};
SimResult simulate_rounds(const ProtocolDag& dag, int32_t start, int64_t r, Party role,
                          const std::function<void(uint8_t)>& send,
                          const std::function<uint8_t()>& recv);

// Text round trip: header "d=<depth> s=<count> root=<id>", then one node per
// line "id owner depth child0 child1 tbit" with '-' for terminal children.
void write_dag(std::ostream& out, const ProtocolDag& dag);
ProtocolDag read_dag(std::istream& in);

}  // namespace nd
