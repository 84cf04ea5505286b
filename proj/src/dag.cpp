#include "noisydialog/dag.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nd {

namespace {

uint64_t draw(std::mt19937_64& rng, uint64_t n) {
  // n is tiny compared to 2^64, so modulo bias is negligible and this stays
  // reproducible across standard library versions.
  return rng() % n;
}

}  // namespace

ProtocolDag build_random_dag(int64_t depth, int64_t state_budget, uint64_t rng_seed,
                             bool single_owner) {
  if (depth < 0) throw std::invalid_argument("build_random_dag: negative depth");
  if (state_budget < depth + 1) state_budget = depth + 1;
  std::mt19937_64 rng(rng_seed);

  // Layer widths: start from the lone root and let layers grow toward an even
  // share of the remaining budget, never faster than the branching allows.
  std::vector<int64_t> width(static_cast<size_t>(depth) + 1, 1);
  int64_t used = 1;
  for (int64_t l = 1; l <= depth; ++l) {
    int64_t remaining_layers = depth - l + 1;
    int64_t share = std::max<int64_t>(1, (state_budget - used) / remaining_layers);
    int64_t w = std::min(share, 2 * width[static_cast<size_t>(l - 1)]);
    width[static_cast<size_t>(l)] = std::max<int64_t>(1, w);
    used += width[static_cast<size_t>(l)];
  }

  std::vector<int64_t> layer_base(static_cast<size_t>(depth) + 1, 0);
  for (int64_t l = 1; l <= depth; ++l)
    layer_base[static_cast<size_t>(l)] =
        layer_base[static_cast<size_t>(l - 1)] + width[static_cast<size_t>(l - 1)];

  ProtocolDag dag;
  dag.d = depth;
  dag.root = 0;
  dag.nodes.resize(static_cast<size_t>(used));
  for (int64_t l = 0; l <= depth; ++l) {
    for (int64_t i = 0; i < width[static_cast<size_t>(l)]; ++i) {
      DagNode& n = dag.nodes[static_cast<size_t>(layer_base[static_cast<size_t>(l)] + i)];
      n.depth = l;
      if (l == depth) {
        n.owner = Party::A;
        n.child[0] = n.child[1] = -1;
        n.tbit = 0;
        continue;
      }
      if (single_owner) {
        n.owner = Party::A;
      } else if (l % 4 == 0) {
        n.owner = Party::A;
      } else if (l % 4 == 2) {
        n.owner = Party::B;
      } else {
        n.owner = draw(rng, 2) ? Party::B : Party::A;
      }
      n.tbit = static_cast<uint8_t>(draw(rng, 2));
      int64_t next_w = width[static_cast<size_t>(l + 1)];
      int64_t base = layer_base[static_cast<size_t>(l + 1)];
      if (next_w == 1) {
        n.child[0] = n.child[1] = static_cast<int32_t>(base);
      } else {
        int64_t c0 = static_cast<int64_t>(draw(rng, static_cast<uint64_t>(next_w)));
        int64_t c1 = static_cast<int64_t>(draw(rng, static_cast<uint64_t>(next_w - 1)));
        if (c1 >= c0) ++c1;
        n.child[0] = static_cast<int32_t>(base + c0);
        n.child[1] = static_cast<int32_t>(base + c1);
      }
    }
  }
  dag.s = static_cast<int64_t>(dag.nodes.size());
  validate_dag(dag);
  return dag;
}

void validate_dag(const ProtocolDag& dag) {
  if (dag.nodes.empty()) throw std::runtime_error("dag: no nodes");
  if (dag.root < 0 || dag.root >= static_cast<int32_t>(dag.nodes.size()))
    throw std::runtime_error("dag: root out of range");
  if (dag.node(dag.root).depth != 0) throw std::runtime_error("dag: root depth must be 0");
  if (dag.s != static_cast<int64_t>(dag.nodes.size()))
    throw std::runtime_error("dag: state count mismatch");
  for (size_t id = 0; id < dag.nodes.size(); ++id) {
    const DagNode& n = dag.nodes[id];
    bool terminal = n.child[0] < 0;
    if (terminal != (n.child[1] < 0)) throw std::runtime_error("dag: half-terminal node");
    if (terminal) {
      if (n.depth != dag.d) throw std::runtime_error("dag: terminal before final depth");
      continue;
    }
    if (n.depth >= dag.d) throw std::runtime_error("dag: non-terminal at final depth");
    for (int b = 0; b < 2; ++b) {
      int32_t c = n.child[b];
      if (c < 0 || c >= static_cast<int32_t>(dag.nodes.size()))
        throw std::runtime_error("dag: child out of range");
      if (dag.node(c).depth != n.depth + 1) throw std::runtime_error("dag: child depth skew");
    }
  }
}

Bits noiseless_run(const ProtocolDag& dag) {
  Bits out;
  out.reserve(static_cast<size_t>(dag.d));
  int32_t cur = dag.root;
  while (!dag.is_terminal(cur)) {
    const DagNode& n = dag.node(cur);
    out.push_back(n.tbit);
    cur = n.child[n.tbit];
  }
  return out;
}

std::vector<int32_t> noiseless_states(const ProtocolDag& dag) {
  std::vector<int32_t> out{dag.root};
  int32_t cur = dag.root;
  while (!dag.is_terminal(cur)) {
    const DagNode& n = dag.node(cur);
    cur = n.child[n.tbit];
    out.push_back(cur);
  }
  return out;
}

SimResult simulate_rounds(const ProtocolDag& dag, int32_t start, int64_t r, Party role,
                          const std::function<void(uint8_t)>& send,
                          const std::function<uint8_t()>& recv) {
  SimStepper stepper(dag, start, role);
  SimResult res;
  res.bits.reserve(static_cast<size_t>(r));
  for (int64_t i = 0; i < r; ++i) {
    uint8_t bit;
    if (stepper.speaking()) {
      bit = stepper.out_bit();
      send(bit);
    } else {
      bit = recv() & 1;
    }
    res.bits.push_back(bit);
    stepper.step(bit);
  }
  res.state = stepper.node();
  return res;
}

void write_dag(std::ostream& out, const ProtocolDag& dag) {
  out << "d=" << dag.d << " s=" << dag.s << " root=" << dag.root << "\n";
  for (size_t id = 0; id < dag.nodes.size(); ++id) {
    const DagNode& n = dag.nodes[id];
    out << id << ' ' << party_char(n.owner) << ' ' << n.depth << ' ';
    if (n.child[0] < 0)
      out << "- -";
    else
      out << n.child[0] << ' ' << n.child[1];
    out << ' ' << static_cast<int>(n.tbit) << "\n";
  }
}

ProtocolDag read_dag(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("dag file: missing header");
  ProtocolDag dag;
  int64_t s = 0;
  if (std::sscanf(header.c_str(), "d=%ld s=%ld root=%d", &dag.d, &s, &dag.root) != 3)
    throw std::runtime_error("dag file: bad header");
  dag.nodes.resize(static_cast<size_t>(s));
  dag.s = s;
  std::string line;
  int64_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int64_t id = 0, depth = 0;
    char owner = 0;
    std::string c0, c1;
    int tbit = 0;
    if (!(ls >> id >> owner >> depth >> c0 >> c1 >> tbit))
      throw std::runtime_error("dag file: bad node line");
    if (id < 0 || id >= s) throw std::runtime_error("dag file: node id out of range");
    DagNode& n = dag.nodes[static_cast<size_t>(id)];
    n.owner = owner == 'B' ? Party::B : Party::A;
    n.depth = depth;
    n.child[0] = c0 == "-" ? -1 : static_cast<int32_t>(std::stol(c0));
    n.child[1] = c1 == "-" ? -1 : static_cast<int32_t>(std::stol(c1));
    n.tbit = static_cast<uint8_t>(tbit & 1);
    ++seen;
  }
  if (seen != s) throw std::runtime_error("dag file: node count mismatch");
  validate_dag(dag);
  return dag;
}

}  // namespace nd
